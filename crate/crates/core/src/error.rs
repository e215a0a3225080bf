use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("number of predictors {m} exceeds the supported maximum {max}")]
    Capacity { m: usize, max: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("environment {0} has no response vector")]
    MissingResponse(usize),

    #[error("unknown environment id {0}")]
    UnknownEnvironment(usize),

    #[error("pooled data is empty")]
    EmptyData,

    #[error("records from different scenarios cannot be aggregated: `{0}` vs `{1}`")]
    MixedScenarios(String, String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
