//! Scripted search trees: deterministic fixtures for exercising the engine
//! against known tree shapes. Used by the engine's own tests and by the
//! acceptance suite; not part of the production search path.

use std::collections::HashMap;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use dsp_verifier::{MockFixture, MockState, MockTransition};

use crate::proposer::{Proposals, ScoredTactic, TacticProposer};
use crate::SearchError;

/// One scripted node: its unique goal text and its children with scripted
/// tactic log-probabilities.
#[derive(Debug, Clone)]
pub struct ScriptedNode {
    pub id: usize,
    pub goal: String,
    /// (child id, logprob), in proposal order.
    pub children: Vec<(usize, f64)>,
}

#[derive(Debug, Clone)]
pub struct ScriptedTree {
    pub nodes: Vec<ScriptedNode>,
}

impl ScriptedTree {
    /// Random tree of up to `max_nodes` nodes. Log-probabilities come from
    /// a small discrete set so score ties are common and tie-breaking is
    /// actually exercised.
    pub fn random(seed: u64, max_nodes: usize) -> Self {
        let mut rng = StdRng::seed_from_u64(seed);
        let n = rng.gen_range(1..=max_nodes.max(1));
        let levels = [-0.5, -1.0, -1.5, -2.0];
        let mut nodes: Vec<ScriptedNode> = (0..n)
            .map(|id| ScriptedNode {
                id,
                goal: format!("G{id}"),
                children: Vec::new(),
            })
            .collect();
        for id in 1..n {
            let parent = rng.gen_range(0..id);
            let logprob = levels[rng.gen_range(0..levels.len())];
            nodes[parent].children.push((id, logprob));
        }
        ScriptedTree { nodes }
    }

    pub fn state_id(id: usize) -> String {
        format!("n{id}")
    }

    /// Mock-verifier fixture: applying `t<child>` to `n<parent>` steps to
    /// `n<child>`.
    pub fn mock_fixture(&self) -> MockFixture {
        MockFixture {
            states: self
                .nodes
                .iter()
                .map(|node| MockState {
                    state_id: Self::state_id(node.id),
                    goal_pretty: node.goal.clone(),
                    transitions: node
                        .children
                        .iter()
                        .map(|(child, _)| MockTransition {
                            tactic: format!("t{child}"),
                            outcome: "next".into(),
                            next: Some(Self::state_id(*child)),
                            message: None,
                            delay_ms: 0,
                        })
                        .collect(),
                })
                .collect(),
            ..Default::default()
        }
    }

    /// Proposer scripting each node's children as model tactics.
    pub fn proposer(&self) -> ScriptedTreeProposer {
        ScriptedTreeProposer {
            by_goal: self
                .nodes
                .iter()
                .map(|node| {
                    (
                        node.goal.clone(),
                        node.children
                            .iter()
                            .map(|(child, logprob)| ScoredTactic {
                                tactic: format!("t{child}"),
                                logprob: *logprob,
                            })
                            .collect(),
                    )
                })
                .collect(),
        }
    }
}

pub struct ScriptedTreeProposer {
    by_goal: HashMap<String, Vec<ScoredTactic>>,
}

impl TacticProposer for ScriptedTreeProposer {
    fn propose(&self, goal_pretty: &str, width: u32) -> Result<Proposals, SearchError> {
        let mut tactics = self.by_goal.get(goal_pretty).cloned().unwrap_or_default();
        tactics.truncate(width as usize);
        Ok(Proposals {
            tokens: 8 * tactics.len() as u64,
            tactics,
        })
    }
}
