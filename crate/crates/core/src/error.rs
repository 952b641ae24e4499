use thiserror::Error;

/// Errors raised by the library. The CLI maps these onto its exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numeric failure: {message} (residual {residual:e})")]
    NumericFailure { message: String, residual: f64 },

    #[error("requested tail tolerance {requested:e} unreachable with {modes} modes; achievable tail {achievable:e}")]
    Capacity {
        requested: f64,
        achievable: f64,
        modes: usize,
    },

    #[error("degenerate frame at node {node}: canonical gram is numerically zero")]
    DegenerateFrame { node: usize },

    #[error("inconclusive result: {0}")]
    Inconclusive(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>, residual: f64) -> Self {
        Error::NumericFailure {
            message: msg.into(),
            residual,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
