use thiserror::Error;

use dsp_gateway::GatewayError;
use dsp_verifier::VerifierError;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error(transparent)]
    Verifier(#[from] VerifierError),

    #[error(transparent)]
    Gateway(#[from] GatewayError),

    #[error("invalid search budget: {0}")]
    InvalidBudget(String),

    #[error("no result for hole {0}")]
    MissingHoleResult(u32),
}
