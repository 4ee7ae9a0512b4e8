use thiserror::Error;

/// Errors raised by the estimation toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A distribution, kernel or prior parameter is outside its valid range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// An evaluation point lies outside the estimation support.
    #[error("point outside support: {0}")]
    Domain(String),

    /// Input data violates a structural requirement (shape, range, size).
    #[error("invalid data: {0}")]
    Data(String),

    /// The integrand produced a NaN.
    #[error("integrand is NaN at {point:?}")]
    Integration { point: Vec<f64> },

    /// A rejection sampler exceeded its retry budget.
    #[error("rejection sampler gave up after {0} consecutive rejections")]
    RejectionCap(u64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
