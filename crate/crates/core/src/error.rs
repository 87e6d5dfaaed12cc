use thiserror::Error;

/// Errors raised by the library. Numerical non-convergence that still yields
/// a valid bound is reported through result flags, not through this type.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("zero vector has no normalizing functional")]
    ZeroVector,

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: String, iterations: usize },

    #[error("subset enumeration needs {count} subsets, cap is {cap}")]
    SubsetCap { count: u128, cap: u128 },

    #[error("frame is not a Schauder frame (distance of frame operator from identity {distance:e})")]
    NotSchauder { distance: f64 },

    #[error("invalid frame: {0}")]
    InvalidFrame(String),
}

impl Error {
    /// Short machine-readable tag, used by the CLI error object.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidSpace(_) => "invalid_space",
            Error::Unsupported(_) => "unsupported",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::ZeroVector => "zero_vector",
            Error::NonConvergence { .. } => "non_convergence",
            Error::SubsetCap { .. } => "subset_cap",
            Error::NotSchauder { .. } => "not_schauder",
            Error::InvalidFrame(_) => "invalid_frame",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
