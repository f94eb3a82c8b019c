//! Pseudo-spectral solver for the 3D incompressible MHD equations on a
//! periodic box, instrumented for one-directional regularity-criterion
//! monitors, exact energy-balance diagnostics, and numerical verification
//! of anisotropic Sobolev interpolation inequalities.

pub(crate) mod buffers;
pub mod cli;
pub mod driver;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod io;
pub mod lab;
pub mod monitors;
pub mod spectral;

pub use dynamics::{ElsasserState, Form, InitialData, SolverConfig, State};
pub use error::{MhdError, Result};
pub use grid::{Axis, Grid, ScalarField, VectorField};
pub use monitors::{CriterionKind, CriterionSpec, MonitorSample, MonitorSeries};
pub use spectral::{SpectrumField, WaveGrid};
