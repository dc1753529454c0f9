use std::path::PathBuf;

use thiserror::Error;

use crate::harness::idx::IdxError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value at index {index} ({context})")]
    NonFinite { index: usize, context: &'static str },

    #[error("diverged at iteration {iter}: {reason}")]
    Diverged { iter: usize, reason: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("empty minibatch")]
    EmptyBatch,

    #[error("sample index {index} out of range for {len} samples")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    #[error("Lyapunov system is singular (rho^2 coincides with an eigenvalue product)")]
    SingularLyapunov,

    #[error("LMI and spectral-radius verdicts disagree: spectral radius {spectral_radius}, rho {rho}, lmi feasible {lmi_feasible}")]
    InconsistentVerdict {
        spectral_radius: f64,
        rho: f64,
        lmi_feasible: bool,
    },

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Idx(#[from] IdxError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
