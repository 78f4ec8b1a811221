use thiserror::Error;

/// Errors raised by estimators, models and resampling routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// The naive estimators have infinite discontinuities at the data points.
    #[error("singular evaluation at data point {x}")]
    SingularEvaluation { x: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
