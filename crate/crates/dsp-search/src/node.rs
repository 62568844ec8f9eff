use serde::{Deserialize, Serialize};

use dsp_verifier::StateHandle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TacticSource {
    Symbolic,
    Model,
}

/// One node of the tactic tree: the state reached by applying `tactic` to
/// the parent, with cumulative log-probability accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchNode {
    pub node_id: u32,
    pub state: StateHandle,
    pub parent: Option<u32>,
    pub tactic: String,
    pub tactic_source: TacticSource,
    /// 0 for symbolic tactics, so symbolic closures always outrank model
    /// chains of equal depth.
    pub logprob: f64,
    pub cum_logprob: f64,
    pub depth: u32,
    pub goal_pretty: String,
}

impl SearchNode {
    pub fn score(&self, normalization_exponent: f64) -> f64 {
        score(self.cum_logprob, self.depth, normalization_exponent)
    }
}

/// Length-normalized priority: cumulative log-probability over depth (to
/// the configured exponent). Depth 0 — the root — scores 0.
pub fn score(cum_logprob: f64, depth: u32, normalization_exponent: f64) -> f64 {
    if depth == 0 {
        return 0.0;
    }
    cum_logprob / (depth as f64).powf(normalization_exponent)
}
