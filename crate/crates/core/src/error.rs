use thiserror::Error;

/// Errors raised by the model, sampler, post-processing and baseline code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A log-density argument left its domain; signals corrupted sufficient statistics.
    #[error("numeric domain error: {0}")]
    NumericDomain(String),

    #[error("logic error: {0}")]
    Logic(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("newton iteration did not converge after {iterations} steps (gradient {gradient:e})")]
    NoConvergence { iterations: usize, gradient: f64 },

    /// The likelihood is maximised on the boundary of the parameter space,
    /// e.g. an intercept for a network without ties.
    #[error("maximum likelihood estimate is on the boundary: {0}")]
    BoundaryMle(String),

    #[error("degenerate mixture fit: {0}")]
    DegenerateFit(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
