use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(
        "potential matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e}); the network is unstable"
    )]
    NonPositiveDefinite { min_eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("covariance matrix violates the uncertainty principle (smallest eigenvalue of V + i sigma/2 is {min_eigenvalue:e})")]
    Unphysical { min_eigenvalue: f64 },

    #[error("moment integration became unphysical at t = {time} (smallest eigenvalue {min_eigenvalue:e}); the step size is too large")]
    UnstableIntegration { time: f64, min_eigenvalue: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("Liouvillian spectrum is defective near eigenvalue {index} (biorthogonal overlap {overlap:e})")]
    DefectiveSpectrum { index: usize, overlap: f64 },

    #[error("eigendecomposition did not converge")]
    EigenFailure,

    #[error("every eigenvalue is stationary; there are no decaying modes")]
    NoDecayingModes,

    #[error("spectral density evaluated at negative frequency {0}")]
    NegativeFrequency(f64),

    #[error("rate matrix is not positive semidefinite (smallest eigenvalue {0:e})")]
    NonPsdRateMatrix(f64),

    #[error("time grid is not uniform: {0}")]
    NonUniformGrid(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
