use std::sync::Arc;

use dsp_core::SamplingParams;
use dsp_gateway::{ChatMessage, ModelBackend, ModelEndpoint};

use crate::SearchError;

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredTactic {
    pub tactic: String,
    pub logprob: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Proposals {
    pub tactics: Vec<ScoredTactic>,
    /// Completion tokens spent on this batch.
    pub tokens: u64,
}

/// A step prover: proof state in, candidate tactics out.
pub trait TacticProposer: Send + Sync {
    /// Sample up to `width` next-tactic candidates for the pretty-printed
    /// goal. One call is one batched request.
    fn propose(&self, goal_pretty: &str, width: u32) -> Result<Proposals, SearchError>;
}

/// Step prover backed by a chat-completion model. The prompt is the proof
/// state verbatim; each completion's first line is one tactic.
pub struct ModelProposer {
    backend: Arc<dyn ModelBackend>,
    endpoint: ModelEndpoint,
    sampling: SamplingParams,
}

impl ModelProposer {
    pub fn new(backend: Arc<dyn ModelBackend>, endpoint: ModelEndpoint, sampling: SamplingParams) -> Self {
        ModelProposer {
            backend,
            endpoint,
            sampling,
        }
    }
}

impl TacticProposer for ModelProposer {
    fn propose(&self, goal_pretty: &str, width: u32) -> Result<Proposals, SearchError> {
        let sampling = SamplingParams {
            n: width,
            ..self.sampling.clone()
        };
        let messages = vec![ChatMessage::user(goal_pretty)];
        let completions = self.backend.complete(&self.endpoint, &messages, &sampling)?;
        let mut proposals = Proposals::default();
        for completion in completions {
            proposals.tokens += completion.tokens;
            let tactic = completion
                .content
                .lines()
                .map(str::trim)
                .find(|l| !l.is_empty())
                .unwrap_or("")
                .to_string();
            if tactic.is_empty() {
                continue;
            }
            proposals.tactics.push(ScoredTactic {
                tactic,
                logprob: completion.logprob.unwrap_or(0.0),
            });
        }
        Ok(proposals)
    }
}
