use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CoreError;

/// Sampling parameters for one model call.
///
/// `seed` keys replay determinism: the orchestrator derives a fresh seed per
/// workflow attempt so independent attempts never collide in the transcript
/// store, while identical phase calls across ensemble stages share one entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingParams {
    pub temperature: f64,
    pub top_p: f64,
    pub max_tokens: u32,
    pub n: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Default for SamplingParams {
    fn default() -> Self {
        SamplingParams {
            temperature: 1.0,
            top_p: 1.0,
            max_tokens: 1024,
            n: 1,
            seed: None,
        }
    }
}

impl SamplingParams {
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.temperature < 0.0 {
            return Err(CoreError::invalid("sampling", "temperature < 0"));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(CoreError::invalid("sampling", "top_p outside (0, 1]"));
        }
        if self.max_tokens < 1 {
            return Err(CoreError::invalid("sampling", "max_tokens < 1"));
        }
        if self.n < 1 {
            return Err(CoreError::invalid("sampling", "n < 1"));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

/// How the draft model is prompted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DraftFormat {
    /// One equation per numbered step.
    ConciseSteps,
    /// The step-format block is omitted from the prompt.
    FreeFormat,
    /// No draft phase at all.
    None,
}

/// One phase-model combination: which models drive draft/sketch/prove and
/// how each is sampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseConfig {
    /// Draft model id, or `None` to skip the draft phase entirely.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub draft_model: Option<String>,
    pub sketch_model: String,
    /// Step-prover model id, or `None` for symbolic-only subgoal search.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prover_model: Option<String>,
    pub draft_format: DraftFormat,
    #[serde(default)]
    pub use_informal_proof: bool,
    /// Per-model sampling parameters, keyed by model id.
    #[serde(default)]
    pub sampling: BTreeMap<String, SamplingParams>,
}

impl PhaseConfig {
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.sketch_model.is_empty() {
            return Err(CoreError::invalid("config", "empty sketch_model"));
        }
        if self.draft_model.is_none() && self.draft_format != DraftFormat::None {
            return Err(CoreError::invalid(
                "config",
                "draft_format set but no draft_model configured",
            ));
        }
        if self.draft_model.is_some() && self.draft_format == DraftFormat::None {
            return Err(CoreError::invalid(
                "config",
                "draft_model configured but draft_format is none",
            ));
        }
        for (model, sampling) in &self.sampling {
            sampling.validate().map_err(|e| {
                CoreError::invalid("config", format!("sampling for {model}: {e}"))
            })?;
        }
        Ok(())
    }

    /// Sampling parameters for `model`, falling back to defaults.
    pub fn sampling_for(&self, model: &str) -> SamplingParams {
        self.sampling.get(model).cloned().unwrap_or_default()
    }

    /// Short content hash identifying this configuration in attempt ids.
    pub fn hash(&self) -> String {
        config_hash(self)
    }

    /// Human-readable label, e.g. `qwq-32b+v3+bfs-prover`.
    pub fn label(&self) -> String {
        let draft = self.draft_model.as_deref().unwrap_or("none");
        let prover = self.prover_model.as_deref().unwrap_or("none");
        format!("{draft}+{}+{prover}", self.sketch_model)
    }
}

/// Content hash of a phase configuration (first 12 hex chars of SHA-256 over
/// the canonical JSON form). Stable across processes: serde serializes struct
/// fields in declaration order and `sampling` is an ordered map.
pub fn config_hash(config: &PhaseConfig) -> String {
    let canonical = serde_json::to_vec(config).expect("config serializes");
    let digest = Sha256::digest(&canonical);
    let mut hex = String::with_capacity(12);
    for byte in digest.iter().take(6) {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}
