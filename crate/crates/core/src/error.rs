use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: invalid UTF-8")]
    InvalidUtf8 { line: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid token {0:?}")]
    InvalidToken(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty source")]
    EmptySource,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("target vocabularies of ensembled scorers differ")]
    VocabularyMismatch,

    #[error("feature already present: {0}")]
    FeatureAlreadyPresent(String),

    #[error("misaligned inputs: {0}")]
    Misaligned(String),

    #[error("non-finite loss in epoch {epoch} at example {index}")]
    NonFiniteLoss { epoch: usize, index: usize },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("model file: {0}")]
    ModelFormat(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
