use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A model parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Malformed input text.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// The input is well formed but the operation is undefined on it.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two inputs that must agree (e.g. joint marginals and a degree
    /// distribution) do not.
    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("no convergence in {what} after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        what: String,
        iterations: usize,
        residual: f64,
    },

    /// A target value lies outside what the model can reach.
    #[error("target {target} outside achievable range [{min}, {max}]")]
    Range { target: f64, min: f64, max: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
