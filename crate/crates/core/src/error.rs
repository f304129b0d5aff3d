use thiserror::Error;

/// Errors raised by the group, set and pipeline layers.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("operands belong to different parent groups ({left} vs {right})")]
    ParentMismatch { left: String, right: String },

    #[error("budget exceeded during {context}: limit {limit}")]
    BudgetExceeded { context: String, limit: u64 },

    #[error("invalid group descriptor: {0}")]
    InvalidDescriptor(String),

    #[error("invalid element: {0}")]
    InvalidElement(String),

    #[error("set is not symmetric")]
    NotSymmetric,

    #[error("set does not contain the identity")]
    MissingIdentity,

    #[error("subgroup is not normal: {0}")]
    NotNormal(String),

    #[error("group is not abelian: {0}")]
    NotAbelian(String),

    #[error("lower central series did not terminate within {0} steps")]
    NotNilpotent(usize),

    #[error("parent group too large: order {order} exceeds limit {limit}")]
    ParentTooLarge { order: u128, limit: u128 },

    #[error("step {0} is too low for this operation (need at least 2)")]
    StepTooLow(usize),

    #[error("step did not drop: factor {factor} has step {step}, ambient step {ambient}")]
    StepDropFailed {
        factor: usize,
        step: usize,
        ambient: usize,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn budget(context: impl Into<String>, limit: u64) -> Self {
        Error::BudgetExceeded {
            context: context.into(),
            limit,
        }
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn verification(msg: impl Into<String>) -> Self {
        Error::Verification(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
