use thiserror::Error;

/// Errors raised by the library. Most variants are contract violations on
/// the caller's inputs.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("agent {agent} out of range for {n} agents")]
    AgentOutOfRange { agent: usize, n: usize },

    #[error("action {action} out of range for agent {agent} with {size} actions")]
    ActionOutOfRange {
        agent: usize,
        action: usize,
        size: usize,
    },

    #[error("enumeration needs {needed} evaluations, cap is {cap} and no sampler is configured")]
    Capacity { needed: u128, cap: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("state representation mismatch: {0}")]
    Representation(String),

    #[error("singular payoff: agent {agent} is collocated with target {target}")]
    Singular { agent: usize, target: usize },

    #[error("weight matrices track different agents ({expected} vs {found})")]
    TrackedMismatch { expected: usize, found: usize },

    #[error("product window has {got} factors, expected {expected}")]
    WindowLength { expected: usize, got: usize },

    #[error("need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("equilibrium set is empty")]
    EmptyEquilibriumSet,

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
