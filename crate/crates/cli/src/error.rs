use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] galprod_core::Error),
    #[error("label {0} is not cached and offline mode forbids fetching it")]
    CacheMiss(String),
    #[error("network error: {0}")]
    Network(String),
    #[error("unexpected payload: {0}")]
    Schema(String),
    #[error("no curve with label {0}")]
    NotFound(String),
    #[error("{0}")]
    Io(String),
    #[error("invalid JSON in {what}: {message}")]
    Json { what: String, message: String },
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::CacheMiss(_) => "cache_miss",
            CliError::Network(_) => "network_error",
            CliError::Schema(_) => "schema_error",
            CliError::NotFound(_) => "not_found",
            CliError::Io(_) => "io_error",
            CliError::Json { .. } => "invalid_json",
        }
    }

    /// The document written to stderr before exiting with status 1.
    pub fn to_json(&self) -> serde_json::Value {
        json!({"error": {"kind": self.kind(), "message": self.to_string()}})
    }
}

pub fn io_err(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}
