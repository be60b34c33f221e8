use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A size guard tripped: qubit cap, path-count guard, or integer overflow.
    #[error("{op}: capacity exceeded ({detail})")]
    Capacity { op: &'static str, detail: String },

    /// An argument lies outside the operation's domain.
    #[error("{op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// Input data failed a structural check (non-unitary gate, bad norm, non-finite value).
    #[error("{op}: invalid input ({detail})")]
    Validation { op: &'static str, detail: String },

    #[error("{op}: cannot post-select on outcome {outcome} (probability {probability:e})")]
    PostSelection {
        op: &'static str,
        outcome: String,
        probability: f64,
    },

    #[error("{op}: precondition violated ({detail})")]
    Precondition { op: &'static str, detail: String },

    #[error("train: non-finite loss at epoch {epoch}")]
    Divergence { epoch: usize },

    /// Malformed input file or document.
    #[error("{format}: {detail}")]
    Parse {
        format: &'static str,
        detail: String,
    },
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn capacity(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Capacity {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn validation(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Validation {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn parse(format: &'static str, detail: impl Into<String>) -> Self {
        Error::Parse {
            format,
            detail: detail.into(),
        }
    }

    /// True for errors caused by resource guards or numerical breakdown rather
    /// than malformed requests.
    pub fn is_runtime(&self) -> bool {
        matches!(
            self,
            Error::Capacity { .. } | Error::Divergence { .. } | Error::PostSelection { .. }
        )
    }
}
