use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}: no such file")]
    NotFound(PathBuf),

    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("unknown label {label:?} for domain {domain}")]
    UnknownLabel { label: String, domain: String },

    #[error("duplicate tweet id {0:?}")]
    DuplicateId(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("stale cache: expected digest {expected}, found {found}")]
    StaleCache { expected: String, found: String },

    #[error("pattern {id} failed to compile: {message}")]
    Pattern { id: usize, message: String },

    #[error("training diverged at epoch {epoch} (loss is not finite)")]
    Divergence { epoch: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::NotFound(path)
        } else {
            Error::Io { path, source }
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::Invalid(message.into())
    }
}
