use thiserror::Error;

/// Errors raised by network construction, propagation and the learning rules.
#[derive(Debug, Error, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("shape error: {context}: expected {expected}, found {found}")]
    Shape {
        context: String,
        expected: usize,
        found: usize,
    },

    #[error("weight file error at line {line}: {message}")]
    WeightFile { line: usize, message: String },

    #[error("environment error: {0}")]
    Environment(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn shape(context: impl Into<String>, expected: usize, found: usize) -> Self {
        Error::Shape {
            context: context.into(),
            expected,
            found,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
