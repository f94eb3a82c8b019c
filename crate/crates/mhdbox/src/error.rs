use std::path::PathBuf;
use thiserror::Error;

/// Crate-wide error type. Variants map onto the failure classes of the
/// numerical kernels, the persistence layer and the CLI.
#[derive(Debug, Error)]
pub enum MhdError {
    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("unsupported grid: {0}")]
    UnsupportedGrid(String),

    #[error("input is not divergence-free: {0}")]
    NotSolenoidal(String),

    #[error("blow-up detected at t = {t}: non-finite field values (last finite energies E_u = {e_u}, E_b = {e_b})")]
    BlowupDetected { t: f64, e_u: f64, e_b: f64 },

    #[error("time samples out of order: {0}")]
    TimeOrder(String),

    #[error("field is not localized: {0}")]
    NonLocalized(String),

    #[error("bad checkpoint magic in {path}")]
    BadMagic { path: PathBuf },

    #[error("unsupported checkpoint version {version} in {path}")]
    UnsupportedVersion { version: u32, path: PathBuf },

    #[error("truncated checkpoint file {path}")]
    TruncatedFile { path: PathBuf },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl MhdError {
    /// Process exit code for the CLI: 1 for usage/config/file-format
    /// problems, 2 for runtime numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            MhdError::Config(_)
            | MhdError::Io { .. }
            | MhdError::BadMagic { .. }
            | MhdError::UnsupportedVersion { .. }
            | MhdError::TruncatedFile { .. }
            | MhdError::UnsupportedGrid(_)
            | MhdError::GridMismatch(_)
            | MhdError::InvalidExponent(_) => 1,
            MhdError::DegenerateInput(_)
            | MhdError::NotSolenoidal(_)
            | MhdError::BlowupDetected { .. }
            | MhdError::TimeOrder(_)
            | MhdError::NonLocalized(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, MhdError>;
