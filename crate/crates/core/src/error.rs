use thiserror::Error;

/// Errors raised by group construction, evaluation and the estimators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CarnotError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A structural invariant of a group, field or norm failed.
    #[error("structure error: {message}{}", location.as_ref().map(|l| format!(" (at {l})")).unwrap_or_default())]
    Structure {
        message: String,
        location: Option<String>,
    },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// Query at a point where the quantity is undefined (typically the origin).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("unknown catalog entry {name:?}{}", suggestion.as_ref().map(|s| format!("; did you mean {s:?}?")).unwrap_or_default())]
    NotFound {
        name: String,
        suggestion: Option<String>,
    },

    #[error("dictionary degenerate: {kept} of {total} directions survive projection, removed {removed:?}")]
    DictionaryDegenerate {
        kept: usize,
        total: usize,
        removed: Vec<usize>,
    },

    #[error("grid box too small: boundary weight ratio {boundary_ratio:.3e} exceeds 1e-6; try half-widths {suggested:?}")]
    BoxTooSmall {
        boundary_ratio: f64,
        suggested: Vec<f64>,
    },

    #[error("non-finite value {value} at point {point:?}")]
    NonFinite { value: f64, point: Vec<f64> },

    #[error("failed to parse {what}: {message}")]
    Parse { what: String, message: String },

    #[error("internal error: {0}")]
    Internal(String),
}

impl CarnotError {
    pub(crate) fn structure(message: impl Into<String>) -> Self {
        CarnotError::Structure {
            message: message.into(),
            location: None,
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        CarnotError::InvalidArgument(message.into())
    }

    pub(crate) fn domain(message: impl Into<String>) -> Self {
        CarnotError::Domain(message.into())
    }
}

pub type Result<T, E = CarnotError> = std::result::Result<T, E>;
