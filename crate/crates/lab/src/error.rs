use std::path::PathBuf;

/// Harness failures, grouped by the exit code they map to.
#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Numerics(meanfield_core::Error),
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl LabError {
    pub fn config(msg: impl Into<String>) -> Self {
        LabError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io { path: path.into(), source }
    }

    /// 2 for configuration problems, 3 for numerical failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => 2,
            LabError::Numerics(e) if e.is_numerical() => 3,
            LabError::Numerics(_) => 2,
            _ => 1,
        }
    }
}

impl From<meanfield_core::Error> for LabError {
    fn from(e: meanfield_core::Error) -> Self {
        LabError::Numerics(e)
    }
}

pub type LabResult<T> = Result<T, LabError>;
