use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the readability-ranking toolkit.
#[derive(Error, Debug)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path} at line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("corrupt file {path}: {message}")]
    CorruptFile { path: PathBuf, message: String },

    #[error("missing resource: {0}")]
    MissingResource(&'static str),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("feature schema mismatch: model expects {expected:#018x}, input was built with {actual:#018x}")]
    SchemaMismatch { expected: u64, actual: u64 },

    #[error("feature '{0}' is constant over the training data; its value range is undefined")]
    ConstantFeature(String),

    #[error("feature '{0}' has no fitted bins")]
    UnfittedFeature(String),

    #[error("undefined correlation: {0}")]
    ZeroVariance(&'static str),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("training diverged at epoch {epoch}: loss is not finite (learning rate too high or unbounded feature values)")]
    NanLoss { epoch: usize },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
