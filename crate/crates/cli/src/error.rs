use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] qgrow::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// JSON that failed to parse, with the offending line quoted.
    #[error("{path}:{line}:{column}: {message}\n    {snippet}\n    {caret:>width$}", width = column.max(&1))]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
        snippet: String,
        caret: &'static str,
    },

    #[error("{0}")]
    Usage(String),

    #[error("{failed} of {total} seeds failed; see {manifest}")]
    PartialRun {
        failed: usize,
        total: usize,
        manifest: PathBuf,
    },

    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::PartialRun { .. } => 3,
            CliError::Verification(_) => 4,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
