use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the store, its dictionaries and the query front end.
#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("position {index} out of range for length {len}")]
    OutOfRange { index: usize, len: usize },
    #[error("occurrence {ordinal} not found ({available} available)")]
    NotFound { ordinal: usize, available: usize },
    #[error("encoding error: {0}")]
    Encoding(String),
    #[error("N-Triples parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("ingest error: {0}")]
    Ingest(String),
    #[error("build error: {0}")]
    Build(String),
    #[error("format error at byte {offset}: {message}")]
    Format { offset: usize, message: String },
    #[error("query syntax error at {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unsupported query construct: {0}")]
    Unsupported(String),
    #[error("query error: {0}")]
    Query(String),
    #[error("internal consistency error: {0}")]
    Internal(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn encoding(msg: impl fmt::Display) -> Self {
        Error::Encoding(msg.to_string())
    }

    pub(crate) fn format(offset: usize, msg: impl fmt::Display) -> Self {
        Error::Format {
            offset,
            message: msg.to_string(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
