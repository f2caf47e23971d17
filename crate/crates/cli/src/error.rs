use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("row {row}, column {column}: cannot parse '{text}' as a number")]
    Parse {
        row: u64,
        column: String,
        text: String,
    },
    #[error("column '{0}' not found")]
    UnknownColumn(String),
    #[error("input contains no values")]
    EmptySeries,
    #[error("non-positive value {value} at index {index}; log returns need positive data")]
    NonPositiveValue { index: usize, value: f64 },
    #[error(
        "unknown experiment '{0}' (expected settingA, settingB, settingC, settingD or powerTable)"
    )]
    UnknownExperiment(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON encoding failed: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] ordsym::Error),
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

impl CliError {
    pub(crate) fn io(path: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}
