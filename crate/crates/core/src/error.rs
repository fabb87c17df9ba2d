use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("unknown criterion `{0}`")]
    UnknownCriterion(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("instance has no target points")]
    MissingTargets,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no linear classifier satisfies the requested properties")]
    Infeasible,

    #[error("solved classifier failed simulation check for dimension {dim}: {reason}")]
    VerificationFailed { dim: usize, reason: String },

    #[error("{what} is {found}, above the cap of {limit}")]
    CapExceeded {
        what: &'static str,
        limit: usize,
        found: usize,
    },

    #[error("geometric region count disagrees with simulation for agent `{agent}`")]
    RegionMismatch { agent: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn invalid(reason: impl Into<String>) -> Self {
        Error::InvalidInstance(reason.into())
    }
}
