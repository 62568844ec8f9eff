use thiserror::Error;

#[derive(Debug, Error)]
pub enum GatewayError {
    /// Transport failure that survived the retry policy.
    #[error("endpoint unavailable: {0}")]
    EndpointUnavailable(String),

    /// The endpoint answered but not in the expected shape.
    #[error("protocol error: {0}")]
    ProtocolError(String),

    /// Replay mode has no transcript for this request fingerprint.
    #[error("no recorded transcript for fingerprint {0}")]
    ReplayMiss(String),

    #[error("invalid request: {0}")]
    InvalidRequest(String),

    #[error("unknown backend `{0}`")]
    UnknownBackend(String),

    #[error("transcript store: {0}")]
    Store(String),
}
