use serde::{Deserialize, Serialize};

use crate::{CoreError, Draft, PhaseConfig, Sketch, TokenUsage};

/// Terminal classification of one workflow attempt. Total: every attempt
/// that terminates maps to exactly one of these.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Proved,
    /// Sorries remain in the assembled proof.
    Partial,
    SketchFailed,
    DraftFailed,
    Timeout,
    BudgetExhausted,
}

/// Deterministic, collision-free attempt identifier.
///
/// Plain strings namespaced by `/` keep persistence and logs greppable.
pub fn new_attempt_id(statement_id: &str, config_hash: &str, k_index: u64) -> String {
    format!("{statement_id}/{config_hash}/{k_index}")
}

/// Everything recorded about one workflow attempt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub attempt_id: String,
    pub statement_id: String,
    pub config: PhaseConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub draft: Option<Draft>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sketch: Option<Sketch>,
    pub outcome: Outcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proof_text: Option<String>,
    pub tokens: TokenUsage,
    pub wall_clock_secs: f64,
    /// Total step-prover samples drawn across all subgoals.
    pub prover_samples: u64,
    /// Failure cause for non-proved outcomes, e.g. `verifier-unavailable`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure_reason: Option<String>,
    /// RFC 3339 creation time; excluded from determinism comparisons.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_at: Option<String>,
}

impl AttemptRecord {
    /// Attempt index within its pass@k loop, parsed back out of the id.
    pub fn k_index(&self) -> Option<u64> {
        self.attempt_id.rsplit('/').next()?.parse().ok()
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if self.outcome == Outcome::Proved {
            let proof = self.proof_text.as_deref().ok_or_else(|| {
                CoreError::invalid("attempt", "proved outcome without proof_text")
            })?;
            if contains_placeholder(proof) {
                return Err(CoreError::invalid(
                    "attempt",
                    "proved outcome but proof still contains a placeholder",
                ));
            }
        }
        Ok(())
    }

    /// Canonical JSON with timing fields zeroed, for replay-determinism
    /// comparisons.
    pub fn canonical_for_compare(&self) -> serde_json::Value {
        let mut record = self.clone();
        record.wall_clock_secs = 0.0;
        record.created_at = None;
        serde_json::to_value(record).expect("record serializes")
    }
}

/// True when `sorry` or `prove_with` occurs as a standalone token.
pub(crate) fn contains_placeholder(proof: &str) -> bool {
    for word in ["sorry", "prove_with"] {
        let mut start = 0;
        while let Some(pos) = proof[start..].find(word) {
            let abs = start + pos;
            let before_ok = abs == 0
                || !proof[..abs]
                    .chars()
                    .next_back()
                    .is_some_and(|c| c.is_alphanumeric() || c == '_');
            let after = abs + word.len();
            let after_ok = after == proof.len()
                || !proof[after..]
                    .chars()
                    .next()
                    .is_some_and(|c| c.is_alphanumeric() || c == '_');
            if before_ok && after_ok {
                return true;
            }
            start = abs + word.len();
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DraftFormat;

    fn record(outcome: Outcome, proof: Option<&str>) -> AttemptRecord {
        AttemptRecord {
            attempt_id: new_attempt_id("imo_2019_p1", "qwq-v3-bfs", 0),
            statement_id: "imo_2019_p1".into(),
            config: PhaseConfig {
                draft_model: None,
                sketch_model: "v3".into(),
                prover_model: None,
                draft_format: DraftFormat::None,
                use_informal_proof: false,
                sampling: Default::default(),
            },
            draft: None,
            sketch: None,
            outcome,
            proof_text: proof.map(String::from),
            tokens: TokenUsage::default(),
            wall_clock_secs: 1.5,
            prover_samples: 0,
            failure_reason: None,
            created_at: Some("2025-01-01T00:00:00Z".into()),
        }
    }

    #[test]
    fn attempt_id_scheme() {
        assert_eq!(
            new_attempt_id("imo_2019_p1", "qwq-v3-bfs", 0),
            "imo_2019_p1/qwq-v3-bfs/0"
        );
        assert_eq!(new_attempt_id("a", "c", 7), "a/c/7");
        // Deterministic: same inputs, same output.
        assert_eq!(new_attempt_id("a", "c", 7), new_attempt_id("a", "c", 7));
    }

    #[test]
    fn proved_requires_clean_proof() {
        assert!(record(Outcome::Proved, None).validate().is_err());
        assert!(record(Outcome::Proved, Some("exact h"))
            .validate()
            .is_ok());
        assert!(record(Outcome::Proved, Some("have h := by\n  sorry"))
            .validate()
            .is_err());
        assert!(record(Outcome::Proved, Some("prove_with[h1]"))
            .validate()
            .is_err());
        // Identifier containing the word is not a placeholder.
        assert!(record(Outcome::Proved, Some("exact not_sorry_lemma"))
            .validate()
            .is_ok());
        assert!(record(Outcome::Partial, Some("sorry")).validate().is_ok());
    }

    #[test]
    fn canonical_compare_ignores_timing() {
        let mut a = record(Outcome::Partial, None);
        let mut b = record(Outcome::Partial, None);
        a.wall_clock_secs = 1.0;
        b.wall_clock_secs = 99.0;
        b.created_at = Some("2030-12-31T23:59:59Z".into());
        assert_eq!(a.canonical_for_compare(), b.canonical_for_compare());
    }

    #[test]
    fn k_index_round_trips() {
        let r = record(Outcome::Partial, None);
        assert_eq!(r.k_index(), Some(0));
    }

    #[test]
    fn serde_round_trip() {
        let r = record(Outcome::Partial, Some("sorry"));
        let json = serde_json::to_string(&r).unwrap();
        let back: AttemptRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(r, back);
    }
}
