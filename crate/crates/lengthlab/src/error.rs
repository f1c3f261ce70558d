use thiserror::Error;

/// Crate-wide error type. Variants map onto the CLI exit codes: everything
/// except `Resource` is a usage/validation failure (exit 2), `Resource`
/// signals a configured cap was hit (exit 3).
#[derive(Debug, Error)]
pub enum Error {
    #[error("usage: {0}")]
    Usage(String),

    #[error("validation: {0}")]
    Validation(String),

    #[error("element belongs to model {found}, expected model {expected}")]
    ModelMismatch { expected: u64, found: u64 },

    #[error("domain: {0}")]
    Domain(String),

    #[error("mode: {0}")]
    Mode(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("structure: {0}")]
    Structure(String),

    #[error("precondition: {0}")]
    Precondition(String),

    #[error("resource cap exceeded: {what} exceeds cap of {cap}")]
    Resource { what: String, cap: usize },

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// CLI exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Resource { .. } => 3,
            _ => 2,
        }
    }
}
