use thiserror::Error;

use num_complex::Complex64;

/// Errors raised by samplers, spectral maps and density evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("Jacobi matrix is reducible: off-diagonal {index} is zero; split into blocks first")]
    Reducible { index: usize },

    #[error("degenerate spectral measure: {0}")]
    DegenerateMeasure(String),

    #[error("root finder did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize, partial_roots: Vec<Complex64> },

    #[error("spectrum is not in the image of the perturbation map: {0}")]
    InconsistentSpectrum(String),

    #[error("singular Jacobian: {0}")]
    SingularJacobian(String),

    #[error("unsupported ensemble: {0}")]
    Unsupported(String),

    #[error("empty input: {0}")]
    Empty(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
