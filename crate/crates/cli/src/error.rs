use std::path::{Path, PathBuf};

use ptsym_core::ErrorKind;
use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error("{0}")]
    Argument(String),
    #[error(transparent)]
    Core(#[from] ptsym_core::Error),
}

impl CliError {
    pub fn invalid(path: &Path, message: &str) -> Self {
        CliError::Parse { path: path.to_path_buf(), message: message.to_string() }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Parse { .. } => "parse",
            CliError::Argument(_) => "invalid_argument",
            CliError::Core(e) => e.code(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Argument(_) => 2,
            CliError::Core(e) => match e.kind() {
                ErrorKind::Validation => 2,
                ErrorKind::Precondition => 3,
                ErrorKind::Numerical => 4,
            },
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({ "error": self.code(), "message": self.to_string() })
    }
}
