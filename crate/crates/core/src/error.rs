use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter or input value violates a model invariant.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("step budget exceeded: {requested} path-steps requested, cap is {cap}")]
    Budget { requested: u128, cap: u128 },

    #[error("insufficient span: {0}")]
    InsufficientSpan(String),

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("no convergence after {0} iterations")]
    NonConvergence(usize),

    #[error("io error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
