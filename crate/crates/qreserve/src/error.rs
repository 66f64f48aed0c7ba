//! Error type shared across the crate.

use thiserror::Error;

/// Errors raised by triangle construction, distribution kernels, model
/// evaluation, sampling, and report generation.
#[derive(Debug, Error)]
pub enum Error {
    /// Triangle or grid dimensions are unusable (e.g. zero accident years).
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    /// Input data violates a contract (negative amounts, missing cells, ...).
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// Cell index outside the I x I grid.
    #[error("invalid index: {0}")]
    InvalidIndex(String),

    /// Argument outside a function's mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Parameter vector violates a family's parameter space.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// A required moment does not exist for the given shape parameters.
    #[error("nonfinite moment: {0}")]
    NonfiniteMoment(String),

    /// An iterative numeric routine failed to converge within its cap.
    #[error("numeric convergence failure: {0}")]
    Convergence(String),

    /// Chain/run configuration is invalid.
    #[error("config error: {0}")]
    Config(String),

    /// Operation is not defined for the requested model family.
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
