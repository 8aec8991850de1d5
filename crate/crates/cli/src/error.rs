use std::path::PathBuf;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] convseq::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{}: {reason}", path.display())]
    Format { path: PathBuf, reason: String },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Stable category printed as `error[<category>]`.
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.category(),
            CliError::Usage(_) => "config",
            CliError::Format { .. } => "parse",
            CliError::Io { .. } | CliError::Csv(_) | CliError::Json(_) => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "config" | "parse" => 2,
            "io" => 74,
            _ => 1,
        }
    }
}

pub(crate) trait IoContext<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T>;
}

impl<T> IoContext<T> for std::io::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|source| CliError::Io {
            context: what(),
            source,
        })
    }
}
