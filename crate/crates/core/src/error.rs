use thiserror::Error;

/// Errors raised by the measure computations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("capacity exceeded: dimension {requested} exceeds limit {limit}")]
    Capacity { requested: usize, limit: usize },

    #[error(
        "truncation insufficient at D={dim}: tail mass {tail:.3e} exceeds {threshold:.1e}; increase the truncation"
    )]
    Truncation { dim: usize, tail: f64, threshold: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("degenerate superposition: branches coincide up to a phase (|z| = {0})")]
    Degenerate(f64),

    #[error("delta = {delta} outside the admissible window [{lower:.6e}, {upper:.6e}]")]
    Window { delta: f64, lower: f64, upper: f64 },

    #[error("time t = {t} outside the validity window [0, {upper:.6e}]")]
    TimeWindow { t: f64, upper: f64 },

    #[error("orthogonal branches admit only delta = 0 (got {0})")]
    Convention(f64),

    #[error("stationary state: the generator does not move the state, time is infinite")]
    Stationary,

    #[error("normalization required: {0}")]
    Normalization(String),

    #[error("finite difference did not converge: {0}")]
    Stencil(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse error classes, used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Numerical,
    Capacity,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Capacity { .. } => ErrorClass::Capacity,
            Error::Truncation { .. } | Error::Numerical(_) | Error::Stationary | Error::Stencil(_) => {
                ErrorClass::Numerical
            }
            _ => ErrorClass::Validation,
        }
    }
}
