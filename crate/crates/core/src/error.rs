use thiserror::Error;

/// Errors produced by the solver, the symbolic engine and the file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite sample in component {component} at index {index}")]
    NonFinite { component: usize, index: usize },

    #[error("hermitian symmetry violated: relative imaginary residue {residue:e}")]
    NotHermitian { residue: f64 },

    #[error("field is not solenoidal: relative divergence {measured:e} exceeds {limit:e}")]
    NotSolenoidal { measured: f64, limit: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "series step failed after {halvings} halvings (dt = {dt:e}, last radius estimate {radius:e})"
    )]
    StepFailed { halvings: u32, dt: f64, radius: f64 },

    #[error("explicit time step dt = {dt:e} exceeds the stability bound; use dt <= {suggested:e}")]
    UnstableStep { dt: f64, suggested: f64 },

    #[error("snapshot format: {0}")]
    Format(String),

    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
