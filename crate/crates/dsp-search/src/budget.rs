use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::SearchError;

fn default_attempts() -> u32 {
    8
}
fn default_width() -> u32 {
    8
}
fn default_tree_size() -> u32 {
    64
}
fn default_beam() -> u32 {
    4
}
fn default_exponent() -> f64 {
    1.0
}
fn default_loop_guard() -> bool {
    true
}
fn default_per_call_secs() -> u64 {
    60
}

/// The A×W×T sample budget for one subgoal: `attempts` root restarts, each
/// expanding at most `tree_size` nodes, sampling at most `width` prover
/// tactics per expansion. Model samples for one subgoal therefore never
/// exceed attempts × width × tree_size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    #[serde(default = "default_attempts")]
    pub attempts: u32,
    #[serde(default = "default_width")]
    pub width: u32,
    #[serde(default = "default_tree_size")]
    pub tree_size: u32,
    /// Successful distinct child states retained per expansion.
    #[serde(default = "default_beam")]
    pub beam: u32,
    /// Exponent on depth in the length normalization. 1 divides by depth.
    #[serde(default = "default_exponent")]
    pub normalization_exponent: f64,
    /// Discard a child whose pretty-printed state equals an ancestor's.
    /// Disable for fidelity runs that want looped transitions kept.
    #[serde(default = "default_loop_guard")]
    pub loop_guard: bool,
    #[serde(default = "default_per_call_secs")]
    pub per_call_timeout_secs: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            attempts: default_attempts(),
            width: default_width(),
            tree_size: default_tree_size(),
            beam: default_beam(),
            normalization_exponent: default_exponent(),
            loop_guard: default_loop_guard(),
            per_call_timeout_secs: default_per_call_secs(),
        }
    }
}

impl SearchBudget {
    pub fn validate(&self) -> Result<(), SearchError> {
        if self.attempts < 1 || self.width < 1 || self.tree_size < 1 || self.beam < 1 {
            return Err(SearchError::InvalidBudget("all counts must be >= 1".into()));
        }
        if self.beam > self.width {
            return Err(SearchError::InvalidBudget(format!(
                "beam {} exceeds width {}",
                self.beam, self.width
            )));
        }
        Ok(())
    }

    pub fn max_samples(&self) -> u64 {
        self.attempts as u64 * self.width as u64 * self.tree_size as u64
    }

    pub fn per_call_timeout(&self) -> Duration {
        Duration::from_secs(self.per_call_timeout_secs)
    }
}

/// The default symbolic tactic portfolio tried at every expansion before
/// the step prover is consulted.
pub fn default_symbolic_tactics() -> Vec<String> {
    [
        "rfl",
        "linarith",
        "nlinarith",
        "ring",
        "positivity",
        "omega",
        "ring_nf",
        "ring_nf at *",
        "simp",
        "simp_all",
        "field_simp",
        "field_simp [*] at *",
        "norm_num",
        "norm_num [*] at *",
        "norm_cast",
        "norm_cast at *",
    ]
    .into_iter()
    .map(String::from)
    .collect()
}
