//! Error type shared across the crate.

use alloc::string::String;

/// Errors raised by planners, environments, the trainer and metrics.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoreError {
    /// Caller passed a value outside an operation's domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// Two containers that must agree in shape do not.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    /// A requested plan cannot be realized (e.g. footfall outside terrain).
    #[error("plan infeasible: {0}")]
    PlanInfeasible(String),
    /// Environment-level failure (non-finite action or state).
    #[error("environment error: {0}")]
    Env(String),
    /// Malformed, corrupted or incompatible checkpoint data.
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    /// Training hit a non-finite loss or parameter and stopped.
    #[error("training aborted: {0}")]
    TrainingAbort(String),
    /// Invalid configuration.
    #[error("config error: {0}")]
    Config(String),
}
