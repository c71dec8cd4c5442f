use colombeau_core::error::CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("unsupported schema version {0}")]
    Schema(u32),

    #[error("undefined name '{name}' referenced by {by}")]
    Undefined { name: String, by: String },

    #[error("cyclic object definitions: {}", .0.join(" -> "))]
    Cycle(Vec<String>),

    #[error("bound violation: {0}")]
    Bound(String),

    #[error("object '{name}' is a {found}, expected {expected}")]
    Type {
        name: String,
        expected: &'static str,
        found: &'static str,
    },

    #[error("invalid object '{name}': {message}")]
    Invalid { name: String, message: String },

    #[error(transparent)]
    Core(#[from] CoreError),
}

pub type Result<T> = std::result::Result<T, CliError>;
