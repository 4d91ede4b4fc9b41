use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The closed-form predictions assume equiprobable letters.
    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("configuration mismatch: {0}")]
    Config(String),

    #[error("corpus is empty after normalization")]
    EmptyCorpus,

    #[error("invalid UTF-8 at byte offset {offset}")]
    Decode { offset: u64 },

    #[error("cannot infer model parameters: {0}")]
    CannotInfer(String),

    #[error("word exceeds the maximum length of {cap} letters")]
    WordTooLong { cap: usize },

    #[error("undefined value: {0}")]
    Undefined(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
