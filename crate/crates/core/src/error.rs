use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of a mathematical function.
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    #[error("dimension error: {0}")]
    Dimension(String),

    /// A configuration value that violates a model constraint.
    #[error("invalid `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    /// An alternating sum left [0, 1] by more than the allowed slack.
    #[error("catastrophic cancellation in {context}: value {value:e} outside [0, 1]")]
    Cancellation { context: &'static str, value: f64 },

    #[error("exact enumeration of {entries}! rank permutations is not supported (limit {limit})")]
    EnumerationTooLarge { entries: usize, limit: usize },

    #[error("invalid trial count {trials}: need at least {min}")]
    InvalidTrials { trials: u64, min: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }

    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field,
            reason: reason.into(),
        }
    }
}
