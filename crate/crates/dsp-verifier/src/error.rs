use thiserror::Error;

#[derive(Debug, Error)]
pub enum VerifierError {
    /// Backend could not be started or reached.
    #[error("verifier unavailable: {0}")]
    Unavailable(String),

    /// Malformed wire traffic or a dead state/environment handle.
    #[error("verifier protocol error: {0}")]
    Protocol(String),

    #[error("verifier fixture: {0}")]
    Fixture(String),
}
