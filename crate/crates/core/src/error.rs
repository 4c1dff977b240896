use thiserror::Error;

/// Errors produced by the model, estimation, and forecasting routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside the open parameter space of its family.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A function argument lies outside the region where it is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The data cannot identify the requested quantity (e.g. zero variance).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// A truncation bound is too small for the requested accuracy.
    #[error("truncation error: {0}")]
    Truncation(String),

    /// The optimizer stopped without meeting its tolerance.
    #[error("optimization did not converge after {iterations} iterations (best value {best_value})")]
    Optimization {
        iterations: usize,
        best_point: Vec<f64>,
        best_value: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
