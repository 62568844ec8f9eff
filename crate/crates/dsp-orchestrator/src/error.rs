use thiserror::Error;

#[derive(Debug, Error)]
pub enum OrchestratorError {
    #[error("attempt store: {0}")]
    Store(String),

    #[error("unknown model endpoint `{0}`")]
    UnknownEndpoint(String),

    #[error("invalid plan: {0}")]
    InvalidPlan(String),
}
