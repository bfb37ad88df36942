use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("letter {letter} out of range for alphabet of size {arity}")]
    LetterOutOfRange { letter: usize, arity: usize },

    #[error("alphabet mismatch: expected {expected}, found {found}")]
    AlphabetMismatch { expected: usize, found: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("resource budget exceeded: {0}")]
    Budget(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("malformed certificate: {0}")]
    MalformedCertificate(String),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn budget(msg: impl Into<String>) -> Self {
        Error::Budget(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
