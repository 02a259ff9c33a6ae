use thiserror::Error;

/// Errors raised by the analytic, optimization and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A configuration value violates one of its invariants.
    #[error("{field} {reason}")]
    Invalid { field: String, reason: String },

    /// A numeric routine was called outside its domain.
    #[error("{function}: {detail}")]
    Domain {
        function: &'static str,
        detail: String,
    },

    /// An iterative evaluation did not converge.
    #[error("{0}: no convergence")]
    NoConvergence(&'static str),

    /// A queue with offered load at or above one.
    #[error("unstable {queue} queue: utilization {utilization:.6} is not below 1")]
    Unstable {
        queue: &'static str,
        utilization: f64,
    },

    /// Service time is undefined without an RSU rate.
    #[error("RSU rate required for {0}")]
    RsuRateRequired(&'static str),
}

impl Error {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn domain(function: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            function,
            detail: detail.into(),
        }
    }

    /// Prefixes the field of an [`Error::Invalid`] with its config section.
    pub fn in_section(self, section: &str) -> Self {
        match self {
            Error::Invalid { field, reason } => Error::Invalid {
                field: format!("{section}.{field}"),
                reason,
            },
            other => other,
        }
    }

    pub(crate) fn with_span(self, text: &str, span: Option<std::ops::Range<usize>>) -> Self {
        match (self, span) {
            (Error::Invalid { field, reason }, Some(span)) => {
                let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
                Error::Invalid {
                    field,
                    reason: format!("(line {line}): {reason}"),
                }
            }
            (other, _) => other,
        }
    }

    /// True for errors that describe the model (load, rates) rather than the input.
    pub fn is_model_error(&self) -> bool {
        matches!(self, Error::Unstable { .. } | Error::RsuRateRequired(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
