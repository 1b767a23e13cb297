use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the solver and its configuration / reporting layers.
#[derive(Debug, Error)]
pub enum PipeError {
    #[error("cannot read config file {path}: {source}")]
    ConfigIo {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config line {line}: expected `key = value`, got `{text}`")]
    ConfigSyntax { line: usize, text: String },

    #[error("config key `{key}`: cannot parse `{value}`")]
    ConfigValue { key: String, value: String },

    #[error("config key `{key}`: unknown key")]
    ConfigUnknownKey { key: String },

    #[error("{key} {message}")]
    Invariant { key: &'static str, message: String },

    #[error("shape mismatch: expected {expected}, got {found}")]
    Shape { expected: String, found: String },

    #[error("singular mode system at xi = {xi} (condition estimate {condition:e})")]
    SingularMode { xi: f64, condition: f64 },

    #[error("unsupported Sobolev order {0}; supported orders are 0, 1, 5/3, 19/12, 2")]
    UnsupportedOrder(String),

    #[error("unknown case tag `{tag}`; supported tags: {supported}")]
    UnknownCase { tag: String, supported: String },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("directory {dir} does not exist")]
    MissingDirectory { dir: PathBuf },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, PipeError>;

pub(crate) fn shape_err(expected: impl ToString, found: impl ToString) -> PipeError {
    PipeError::Shape {
        expected: expected.to_string(),
        found: found.to_string(),
    }
}
