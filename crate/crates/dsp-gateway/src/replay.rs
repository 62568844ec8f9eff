use std::sync::Arc;

use dsp_core::SamplingParams;

use crate::backend::{Completion, ModelBackend};
use crate::{request_fingerprint, ChatMessage, GatewayError, ModelEndpoint, TranscriptStore};

/// Deterministic backend: answers every request from the transcript store,
/// byte-identical across runs. A request with no recorded transcript is an
/// error, never a fabrication.
pub struct ReplayBackend {
    store: Arc<TranscriptStore>,
}

impl ReplayBackend {
    pub fn new(store: Arc<TranscriptStore>) -> Self {
        ReplayBackend { store }
    }

    pub fn store(&self) -> &TranscriptStore {
        &self.store
    }
}

impl ModelBackend for ReplayBackend {
    fn name(&self) -> &'static str {
        "replay"
    }

    fn complete(
        &self,
        endpoint: &ModelEndpoint,
        messages: &[ChatMessage],
        sampling: &SamplingParams,
    ) -> Result<Vec<Completion>, GatewayError> {
        if messages.is_empty() {
            return Err(GatewayError::InvalidRequest("empty message list".into()));
        }
        let fingerprint = request_fingerprint(&endpoint.model_id, messages, sampling);
        let record = self
            .store
            .get(&fingerprint)
            .ok_or(GatewayError::ReplayMiss(fingerprint))?;
        let completions = record
            .responses
            .iter()
            .enumerate()
            .map(|(i, content)| Completion {
                content: content.clone(),
                tokens: record.token_counts.get(i).copied().unwrap_or(0),
                logprob: record.logprobs.as_ref().and_then(|l| l.get(i).copied()),
            })
            .collect();
        Ok(completions)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{ChatRequest, TranscriptRecord};

    fn endpoint() -> ModelEndpoint {
        ModelEndpoint {
            model_id: "bfs-prover".into(),
            base_url: "https://unused.test".into(),
            api_key_env: String::new(),
            sampling_defaults: SamplingParams::default(),
            request_timeout_secs: 1,
            max_retries: 0,
        }
    }

    fn prover_sampling() -> SamplingParams {
        SamplingParams {
            temperature: 1.1,
            top_p: 1.0,
            max_tokens: 64,
            n: 8,
            seed: None,
        }
    }

    #[test]
    fn replay_is_byte_identical() {
        let store = Arc::new(TranscriptStore::in_memory());
        let messages = vec![ChatMessage::user("⊢ x = x")];
        let sampling = SamplingParams::default();
        let fp = request_fingerprint("bfs-prover", &messages, &sampling);
        store
            .append(TranscriptRecord {
                fingerprint: fp,
                request: ChatRequest {
                    model: "bfs-prover".into(),
                    messages: messages.clone(),
                    temperature: 1.0,
                    top_p: 1.0,
                    max_tokens: 1024,
                    n: 1,
                    seed: None,
                    logprobs: None,
                },
                responses: vec!["rfl".into()],
                token_counts: vec![1],
                logprobs: Some(vec![-0.25]),
            })
            .unwrap();

        let backend = ReplayBackend::new(store);
        let a = backend.complete(&endpoint(), &messages, &sampling).unwrap();
        let b = backend.complete(&endpoint(), &messages, &sampling).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[0].content, "rfl");
        assert_eq!(a[0].logprob, Some(-0.25));
    }

    #[test]
    fn prover_settings_return_n_completions_within_max_tokens() {
        // §5.1 prover settings: temperature 1.1, top-p 1, max_tokens 64, n 8.
        let store = Arc::new(TranscriptStore::in_memory());
        let messages = vec![ChatMessage::user("⊢ goal")];
        let sampling = prover_sampling();
        let fp = request_fingerprint("bfs-prover", &messages, &sampling);
        let responses: Vec<String> = (0..8).map(|i| format!("tactic_{i}")).collect();
        store
            .append(TranscriptRecord {
                fingerprint: fp,
                request: ChatRequest {
                    model: "bfs-prover".into(),
                    messages: messages.clone(),
                    temperature: 1.1,
                    top_p: 1.0,
                    max_tokens: 64,
                    n: 8,
                    seed: None,
                    logprobs: Some(true),
                },
                responses,
                token_counts: vec![3; 8],
                logprobs: Some(vec![-1.0; 8]),
            })
            .unwrap();

        let backend = ReplayBackend::new(store);
        let completions = backend.complete(&endpoint(), &messages, &sampling).unwrap();
        assert_eq!(completions.len(), 8);
        assert!(completions.iter().all(|c| c.tokens <= 64));
    }

    #[test]
    fn miss_is_an_error() {
        let backend = ReplayBackend::new(Arc::new(TranscriptStore::in_memory()));
        let err = backend
            .complete(&endpoint(), &[ChatMessage::user("?")], &SamplingParams::default())
            .unwrap_err();
        assert!(matches!(err, GatewayError::ReplayMiss(_)));
    }
}
