use std::path::PathBuf;

use thiserror::Error;

use crate::corpus::Label;
use crate::wordnet::WordNetError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot access {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}:{line}: malformed record: {reason}", .path.display())]
    MalformedRecord {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("{}:{line}: duplicate id {id:?}", .path.display())]
    DuplicateId {
        path: PathBuf,
        line: usize,
        id: String,
    },
    #[error(
        "not enough {label} records for the dev set: {available} available, {required} required"
    )]
    InsufficientLabel {
        label: Label,
        available: usize,
        required: usize,
    },
    #[error("dev size {0} is not divisible by 3")]
    InvalidDevSize(usize),
    #[error("test fraction {0} is outside (0, 1)")]
    InvalidTestFrac(f64),
    #[error("augmentation target must be positive")]
    InvalidTarget,
    #[error("categories {0} need augmentation but no WordNet directory was given")]
    MissingLexicon(String),
    #[error(transparent)]
    WordNet(#[from] WordNetError),
    #[error("cannot serialize output: {0}")]
    Serialize(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the inputs or flags rather than by the
    /// program itself.
    pub fn is_user_error(&self) -> bool {
        !matches!(self, Error::Serialize(_))
    }
}
