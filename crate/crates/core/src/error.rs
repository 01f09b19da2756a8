use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("ill-conditioned kernel matrix: Cholesky failed at jitter levels {jitters:?}")]
    IllConditioned { jitters: Vec<f64> },

    #[error("training failed: all restarts aborted ({})", diagnostics.join("; "))]
    TrainingFailed { diagnostics: Vec<String> },

    #[error("empty test set")]
    EmptyTestSet,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}, line {line}: {message}")]
    Parse {
        context: String,
        line: usize,
        message: String,
    },

    #[error("{0}")]
    Data(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(context: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            line,
            message: message.into(),
        }
    }

    /// Short module tag used in one-line CLI summaries.
    pub fn module(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. }
            | Error::Unsupported(_)
            | Error::InvalidParameter(_) => "kernel",
            Error::IllConditioned { .. } | Error::EmptyTestSet => "gp",
            Error::TrainingFailed { .. } => "optimizer",
            Error::DegenerateInput(_) | Error::Data(_) => "data",
            Error::Io { .. } | Error::Parse { .. } => "io",
        }
    }
}
