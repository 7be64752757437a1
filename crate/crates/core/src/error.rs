use thiserror::Error;

/// Errors raised by the metric, tree and index constructions.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("point {0} is not in the structure")]
    UnknownPoint(usize),
    #[error("position {pos} out of range 1..={n}")]
    PositionOutOfRange { pos: usize, n: usize },
    #[error("no such ancestor")]
    NoSuchAncestor,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
