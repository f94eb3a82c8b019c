//! Persistence and reporting: checkpoints, run configuration, and the CSV
//! and JSON outputs.

pub mod checkpoint;
pub mod config;
pub mod report;
