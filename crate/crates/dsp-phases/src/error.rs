use thiserror::Error;

use dsp_gateway::GatewayError;
use dsp_verifier::VerifierError;

#[derive(Debug, Error)]
pub enum PhaseError {
    #[error(transparent)]
    Gateway(#[from] GatewayError),

    #[error(transparent)]
    Verifier(#[from] VerifierError),

    /// Model output was empty after thinking-token filtering.
    #[error("draft model produced no answer text")]
    EmptyDraft,

    /// The checker rejected the theorem statement itself; masking cannot
    /// repair that.
    #[error("error on theorem header line {line}: {message}")]
    HeaderDiagnostic { line: usize, message: String },

    /// Masking reached a fixed point with errors still present.
    #[error("repair stuck: diagnostics remain but no line changed status")]
    RepairStuck,

    #[error("repair iteration cap {cap} exceeded")]
    RepairCapExceeded { cap: u32 },

    #[error("phase deadline exceeded")]
    DeadlineExceeded,

    #[error("invalid sketch: {0}")]
    InvalidSketch(String),
}
