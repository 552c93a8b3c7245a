use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("unknown class name `{0}`")]
    UnknownClass(String),

    #[error("unknown derived class `{0}`")]
    NotFound(String),

    #[error("derived class `{0}` is already defined")]
    DuplicateDerived(String),

    #[error("policy `{0}` cannot override a built-in context")]
    BuiltinPolicy(String),

    #[error("gold and predicted sequences differ in length ({gold} vs {pred})")]
    LengthMismatch { gold: usize, pred: usize },

    #[error("{0}")]
    Mismatch(String),

    #[error("cannot evaluate an empty sequence")]
    EmptyInput,

    #[error("sentence {index} has no label")]
    Unlabeled { index: usize },

    #[error("split fraction must lie strictly between 0 and 1, got {0}")]
    InvalidFraction(f64),

    #[error("invalid priority order: {0}")]
    InvalidPriority(String),

    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// True for failures of the underlying stream rather than of its contents.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_))
    }
}
