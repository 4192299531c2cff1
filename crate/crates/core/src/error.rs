use thiserror::Error;

/// Errors raised by the numerical layers and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("problem size {requested} exceeds the configured cap of {cap} (dense storage is n^2 doubles)")]
    MemoryCap { requested: usize, cap: usize },

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("eigenvalue {value:e} is below the tolerated floor {floor:e}; input is not positive semidefinite")]
    NotPositiveSemidefinite { value: f64, floor: f64 },

    #[error("spectrum has zero trace")]
    ZeroTrace,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("Cholesky factorization failed at pivot {pivot} (value {value:e}) even after diagonal jitter")]
    Cholesky { pivot: usize, value: f64 },

    #[error("complexity bound violated: {0}")]
    BoundViolated(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("output encoding: {0}")]
    Output(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
