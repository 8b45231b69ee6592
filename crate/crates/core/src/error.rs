use thiserror::Error;

/// Errors raised by the estimators, generators and file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("all sample weights are zero")]
    DegenerateWeights,

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("slice around alpha={alpha:.4} is empty after {attempts} draws; draw a fresh alpha")]
    EmptySlice { alpha: f64, attempts: usize },

    #[error("exhaustive oracle refuses d={d} (limit {limit})")]
    OracleTooLarge { d: usize, limit: usize },

    #[error("variance step produced a non-positive spike alignment (y={0})")]
    VarianceStep(f64),

    #[error("degenerate covariance: {0}")]
    DegenerateCovariance(String),

    #[error("dataset format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
