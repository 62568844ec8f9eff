use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use dsp_core::SamplingParams;

/// One chat message. Role is `system`, `user`, or `assistant`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: "user".into(),
            content: content.into(),
        }
    }

    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage {
            role: "system".into(),
            content: content.into(),
        }
    }
}

#[derive(Serialize)]
struct FingerprintInput<'a> {
    model: &'a str,
    messages: &'a [ChatMessage],
    temperature: f64,
    top_p: f64,
    max_tokens: u32,
    n: u32,
    seed: Option<u64>,
}

/// Content address of a request: SHA-256 over the canonical JSON form of
/// (model, messages, sampling). Stable under re-serialization because the
/// field order is fixed by the struct declaration.
pub fn request_fingerprint(model: &str, messages: &[ChatMessage], sampling: &SamplingParams) -> String {
    let input = FingerprintInput {
        model,
        messages,
        temperature: sampling.temperature,
        top_p: sampling.top_p,
        max_tokens: sampling.max_tokens,
        n: sampling.n,
        seed: sampling.seed,
    };
    let bytes = serde_json::to_vec(&input).expect("fingerprint input serializes");
    let digest = Sha256::digest(&bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
