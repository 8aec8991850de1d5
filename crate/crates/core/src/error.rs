use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot decode image {source_name}: {reason}")]
    Decode { source_name: String, reason: String },

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("index {index} out of range (len {len})")]
    Range { index: usize, len: usize },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("descriptor cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable category, used for CLI exit reporting.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Decode { .. } => "decode",
            Error::Dataset(_) => "dataset",
            Error::Parse { .. } => "parse",
            Error::Evaluation(_) => "evaluation",
            Error::Range { .. } => "range",
            Error::Invariant(_) => "internal",
            Error::Cache(_) => "cache",
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }
}
