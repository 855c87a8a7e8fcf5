use std::path::PathBuf;

use thiserror::Error;

/// Errors produced while building, validating or running crowdsensing scenarios.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("quality {value} for worker {worker} on task {task} is outside [0, 1]")]
    QualityOutOfRange { worker: usize, task: usize, value: f64 },

    #[error("instance too large to enumerate: {count} candidate selections exceed the limit of {limit}")]
    EnumerationGuard { count: u128, limit: u128 },

    #[error("normalized entropy is undefined: {0}")]
    UndefinedEntropy(&'static str),

    #[error("trace {path}: {reason}")]
    Trace { path: PathBuf, reason: String },

    #[error("not enough trace data: {0}")]
    InsufficientData(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("scenario file: {0}")]
    Format(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid_param(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
