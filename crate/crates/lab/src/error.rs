use std::path::PathBuf;

/// Failures of the driver. All of them map to exit status 2.
#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("unknown experiment `{0}` (see `lpsq list`)")]
    UnknownExperiment(String),
    #[error("experiment `{experiment}` rejects its parameters: {source}")]
    Precondition {
        experiment: String,
        #[source]
        source: lpsq_core::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed snapshot: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] lpsq_core::Error),
}

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
