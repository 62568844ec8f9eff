use serde::{Deserialize, Serialize};

use crate::{DraftFormat, TokenUsage};

/// One numbered step of a natural-language draft.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DraftStep {
    /// 1-based, strictly increasing.
    pub index: u32,
    pub body: String,
}

/// The parsed output of the draft phase: key formulas, one per step, with
/// thinking tokens already filtered out of `raw_answer`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Draft {
    pub statement_id: String,
    pub steps: Vec<DraftStep>,
    /// Post-filter answer text. Contains no thinking markers.
    pub raw_answer: String,
    pub format: DraftFormat,
    pub tokens: TokenUsage,
    /// Set when no step headings were found and the whole answer became a
    /// single step.
    #[serde(default)]
    pub non_conforming: bool,
    /// Set when headings appeared out of numeric order and were renumbered
    /// in document order.
    #[serde(default)]
    pub reordered: bool,
}

impl Draft {
    /// Step indices must run 1..=n.
    pub fn indices_are_canonical(&self) -> bool {
        self.steps
            .iter()
            .enumerate()
            .all(|(i, step)| step.index as usize == i + 1)
    }
}
