use thiserror::Error;

pub type Result<T> = std::result::Result<T, QgemError>;

#[derive(Debug, Error)]
pub enum QgemError {
    /// A configuration value violates its invariant; `key` names the offending field.
    #[error("invalid configuration value for `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("inconsistent geometry: {0}")]
    Geometry(String),

    #[error("invalid quantum state: {0}")]
    InvalidState(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("shot budget {total} too small: {units} measured units need at least {required}")]
    Budget {
        total: u64,
        units: usize,
        required: u64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl QgemError {
    pub(crate) fn config(key: &str, reason: impl Into<String>) -> Self {
        QgemError::Config {
            key: key.to_string(),
            reason: reason.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            QgemError::Config { .. } | QgemError::Unsupported(_) | QgemError::Budget { .. } => 2,
            QgemError::Geometry(_)
            | QgemError::InvalidState(_)
            | QgemError::Dimension { .. }
            | QgemError::Numerical(_) => 3,
            QgemError::Io(_) | QgemError::Json(_) | QgemError::Csv(_) => 4,
        }
    }
}
