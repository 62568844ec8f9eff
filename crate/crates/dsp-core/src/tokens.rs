use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Token accounting for one attempt (or an aggregate of attempts).
///
/// `per_model` breaks the same tokens down by model id, so the category
/// totals and the per-model totals always sum to the same number.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub answer_tokens: u64,
    pub thinking_tokens: u64,
    pub prover_tokens: u64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub per_model: BTreeMap<String, u64>,
}

impl TokenUsage {
    /// Record `answer` + `thinking` tokens attributed to `model`.
    pub fn record_chat(&mut self, model: &str, answer: u64, thinking: u64) {
        self.answer_tokens += answer;
        self.thinking_tokens += thinking;
        *self.per_model.entry(model.to_string()).or_insert(0) += answer + thinking;
    }

    /// Record prover-sample tokens attributed to `model`.
    pub fn record_prover(&mut self, model: &str, tokens: u64) {
        self.prover_tokens += tokens;
        *self.per_model.entry(model.to_string()).or_insert(0) += tokens;
    }

    pub fn add(&mut self, other: &TokenUsage) {
        self.answer_tokens += other.answer_tokens;
        self.thinking_tokens += other.thinking_tokens;
        self.prover_tokens += other.prover_tokens;
        for (model, count) in &other.per_model {
            *self.per_model.entry(model.clone()).or_insert(0) += count;
        }
    }

    pub fn total(&self) -> u64 {
        self.answer_tokens + self.thinking_tokens + self.prover_tokens
    }

    /// The per-model breakdown must account for exactly the category totals.
    pub fn is_consistent(&self) -> bool {
        self.per_model.values().sum::<u64>() == self.total()
    }
}
