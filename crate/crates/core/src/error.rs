use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QforkError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("dimension {dim} exceeds the configured cap of {cap} ({what})")]
    DimensionCap {
        what: &'static str,
        dim: usize,
        cap: usize,
    },

    #[error("index {index} out of range for {len} subsystems")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("subsystem {0} listed more than once")]
    RepeatedTarget(usize),

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("projector is not idempotent (deviation {0:.3e})")]
    NotIdempotent(f64),

    #[error("channel is not trace preserving (deviation {0:.3e})")]
    NotCptp(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("probability {0} lies outside [0, 1] beyond the clipping window")]
    ProbabilityOutOfRange(f64),

    #[error("non-finite matrix entry")]
    NonFinite,

    #[error("unsupported operation: {0}")]
    Unsupported(String),
}

impl QforkError {
    pub fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        QforkError::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, QforkError>;
