use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A theorem hypothesis required by the operation does not hold.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    /// A sign or positivity assumption on the data does not hold.
    #[error("assumption violated: {0}")]
    Assumption(String),

    #[error("quadrature failed at |x| = {radius}: {detail}")]
    Quadrature { radius: f64, detail: String },

    #[error("boundary leakage {measured:.3e} exceeds limit {limit:.3e}")]
    BoundaryLeakage { measured: f64, limit: f64 },

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn hypothesis(msg: impl Into<String>) -> Self {
        Error::Hypothesis(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
