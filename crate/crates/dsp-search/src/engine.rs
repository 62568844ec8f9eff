use dsp_core::{Deadline, Strategy, SubgoalHole};
use dsp_verifier::{StateHandle, TacticOutcome, Verifier, VerifierSession};

use crate::frontier::Frontier;
use crate::node::{SearchNode, TacticSource};
use crate::proposer::TacticProposer;
use crate::{ScoredTactic, SearchBudget};

#[derive(Debug, Clone, PartialEq)]
pub enum SubgoalStatus {
    Proved { tactics: Vec<String> },
    Exhausted,
    Timeout,
    NoExpandableNodes,
}

/// Instrumentation counters; the budget-safety guarantees are asserted
/// against these in tests.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Telemetry {
    pub attempts_run: u32,
    pub max_expansions_per_attempt: u64,
    pub max_samples_per_expansion: u64,
    pub max_children_per_expansion: u64,
    /// State ids in expansion (frontier pop) order, across all attempts.
    pub expansion_order: Vec<String>,
    /// Set when the prover failed and the search fell back to symbolic-only
    /// expansion.
    pub degraded_to_symbolic: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubgoalResult {
    pub hole_id: u32,
    pub status: SubgoalStatus,
    /// Step-prover completions drawn. Bounded by attempts × width × tree_size.
    pub samples_used: u64,
    pub nodes_expanded: u64,
    /// Strategy that proved the hole, or the last one tried.
    pub strategy_used: Option<Strategy>,
    /// Prover completion tokens spent.
    pub prover_tokens: u64,
    pub telemetry: Telemetry,
}

impl SubgoalResult {
    pub fn proved_tactics(&self) -> Option<&[String]> {
        match &self.status {
            SubgoalStatus::Proved { tactics } => Some(tactics),
            _ => None,
        }
    }
}

enum AttemptEnd {
    Solved(Vec<String>),
    FrontierEmpty,
    TreeSizeReached,
    Timeout,
}

pub struct SearchEngine {
    budget: SearchBudget,
    symbolic_tactics: Vec<String>,
}

impl SearchEngine {
    pub fn new(budget: SearchBudget, symbolic_tactics: Vec<String>) -> Self {
        SearchEngine {
            budget,
            symbolic_tactics,
        }
    }

    pub fn budget(&self) -> &SearchBudget {
        &self.budget
    }

    /// Discharge one subgoal hole. The strategies come from the hole
    /// (hinted first when hints exist), with the attempt budget split
    /// evenly between them; the first strategy takes the odd attempt.
    pub fn prove_subgoal(
        &self,
        hole: &SubgoalHole,
        root: &StateHandle,
        root_goal: &str,
        verifier: &dyn Verifier,
        session: &VerifierSession,
        proposer: Option<&dyn TacticProposer>,
        deadline: Deadline,
    ) -> SubgoalResult {
        let mut result = SubgoalResult {
            hole_id: hole.hole_id,
            status: SubgoalStatus::Exhausted,
            samples_used: 0,
            nodes_expanded: 0,
            strategy_used: None,
            prover_tokens: 0,
            telemetry: Telemetry::default(),
        };

        let strategies = if hole.strategies.is_empty() {
            vec![Strategy::AllHypotheses]
        } else {
            hole.strategies.clone()
        };
        let share = self.budget.attempts / strategies.len() as u32;
        let extra = self.budget.attempts % strategies.len() as u32;

        let mut all_empty = true;
        for (i, &strategy) in strategies.iter().enumerate() {
            let attempts = share + u32::from((i as u32) < extra);
            if attempts == 0 {
                continue;
            }
            if deadline.expired() {
                result.status = SubgoalStatus::Timeout;
                return result;
            }
            result.strategy_used = Some(strategy);

            // The hinted strategy prunes the context to the hinted
            // hypotheses before searching.
            let (start, start_goal, prefix) = match strategy {
                Strategy::HintedOnly => {
                    let clear = format!("clear * - {}", hole.hinted_hypotheses.join(" "));
                    match verifier.apply_tactic(
                        session,
                        root,
                        &clear,
                        deadline.cap(self.budget.per_call_timeout()),
                    ) {
                        Ok(applied) => match applied.outcome {
                            TacticOutcome::NewState { state, goal_pretty } => {
                                (state, goal_pretty, vec![clear])
                            }
                            TacticOutcome::Solved => {
                                result.status = SubgoalStatus::Proved {
                                    tactics: vec![clear],
                                };
                                return result;
                            }
                            TacticOutcome::Failed { message } => {
                                tracing::debug!("hinted prune failed: {message}");
                                continue;
                            }
                        },
                        Err(_) => {
                            result.status = SubgoalStatus::Timeout;
                            return result;
                        }
                    }
                }
                Strategy::AllHypotheses => (root.clone(), root_goal.to_string(), Vec::new()),
            };

            for _ in 0..attempts {
                if deadline.expired() {
                    result.status = SubgoalStatus::Timeout;
                    return result;
                }
                result.telemetry.attempts_run += 1;
                match self.run_attempt(
                    &start,
                    &start_goal,
                    verifier,
                    session,
                    proposer,
                    deadline,
                    &mut result,
                ) {
                    AttemptEnd::Solved(tactics) => {
                        let mut sequence = prefix.clone();
                        sequence.extend(tactics);
                        result.status = SubgoalStatus::Proved { tactics: sequence };
                        return result;
                    }
                    AttemptEnd::FrontierEmpty => {}
                    AttemptEnd::TreeSizeReached => all_empty = false,
                    AttemptEnd::Timeout => {
                        result.status = SubgoalStatus::Timeout;
                        return result;
                    }
                }
            }
        }

        result.status = if result.telemetry.attempts_run > 0 && all_empty {
            SubgoalStatus::NoExpandableNodes
        } else {
            SubgoalStatus::Exhausted
        };
        result
    }

    /// One best-first attempt from `start`. Terminates on solved, empty
    /// frontier, the tree-size cap, or the deadline.
    #[allow(clippy::too_many_arguments)]
    fn run_attempt(
        &self,
        start: &StateHandle,
        start_goal: &str,
        verifier: &dyn Verifier,
        session: &VerifierSession,
        proposer: Option<&dyn TacticProposer>,
        deadline: Deadline,
        result: &mut SubgoalResult,
    ) -> AttemptEnd {
        let mut nodes: Vec<SearchNode> = vec![SearchNode {
            node_id: 0,
            state: start.clone(),
            parent: None,
            tactic: String::new(),
            tactic_source: TacticSource::Symbolic,
            logprob: 0.0,
            cum_logprob: 0.0,
            depth: 0,
            goal_pretty: start_goal.to_string(),
        }];
        let mut frontier = Frontier::new();
        frontier.push(0, 0.0);
        let mut expansions: u64 = 0;

        loop {
            if deadline.expired() {
                return AttemptEnd::Timeout;
            }
            if expansions >= self.budget.tree_size as u64 {
                return AttemptEnd::TreeSizeReached;
            }
            let Some(current_id) = frontier.pop() else {
                return AttemptEnd::FrontierEmpty;
            };
            expansions += 1;
            result.nodes_expanded += 1;
            result.telemetry.max_expansions_per_attempt =
                result.telemetry.max_expansions_per_attempt.max(expansions);
            result
                .telemetry
                .expansion_order
                .push(nodes[current_id as usize].state.0.clone());

            // Candidates: the symbolic portfolio in order, then one batched
            // prover sample, deduplicated textually (first occurrence wins).
            let mut candidates: Vec<ScoredTactic> = self
                .symbolic_tactics
                .iter()
                .map(|t| ScoredTactic {
                    tactic: t.clone(),
                    logprob: 0.0,
                })
                .collect();
            let symbolic_count = candidates.len();
            if let Some(proposer) = proposer {
                let goal = nodes[current_id as usize].goal_pretty.clone();
                match proposer.propose(&goal, self.budget.width) {
                    Ok(proposals) => {
                        let sampled = proposals.tactics.len() as u64;
                        result.samples_used += sampled;
                        result.prover_tokens += proposals.tokens;
                        result.telemetry.max_samples_per_expansion =
                            result.telemetry.max_samples_per_expansion.max(sampled);
                        candidates.extend(proposals.tactics);
                    }
                    Err(err) => {
                        tracing::warn!("prover proposal failed; symbolic-only: {err}");
                        result.telemetry.degraded_to_symbolic = true;
                    }
                }
            }
            let mut seen = std::collections::HashSet::with_capacity(candidates.len());
            candidates.retain(|c| seen.insert(c.tactic.clone()));

            let mut children: u64 = 0;
            for (ci, candidate) in candidates.iter().enumerate() {
                if children >= self.budget.beam as u64 {
                    break;
                }
                if deadline.expired() {
                    return AttemptEnd::Timeout;
                }
                let applied = match verifier.apply_tactic(
                    session,
                    &nodes[current_id as usize].state,
                    &candidate.tactic,
                    deadline.cap(self.budget.per_call_timeout()),
                ) {
                    Ok(applied) => applied,
                    Err(_) => return AttemptEnd::Timeout,
                };
                let source = if ci < symbolic_count {
                    TacticSource::Symbolic
                } else {
                    TacticSource::Model
                };
                match applied.outcome {
                    TacticOutcome::Solved => {
                        let mut tactics = path_tactics(&nodes, current_id);
                        tactics.push(candidate.tactic.clone());
                        return AttemptEnd::Solved(tactics);
                    }
                    TacticOutcome::Failed { .. } => {}
                    TacticOutcome::NewState { state, goal_pretty } => {
                        if self.budget.loop_guard
                            && is_ancestor_state(&nodes, current_id, &goal_pretty)
                        {
                            continue;
                        }
                        let parent = &nodes[current_id as usize];
                        let node = SearchNode {
                            node_id: nodes.len() as u32,
                            state,
                            parent: Some(current_id),
                            tactic: candidate.tactic.clone(),
                            tactic_source: source,
                            logprob: if source == TacticSource::Symbolic {
                                0.0
                            } else {
                                candidate.logprob
                            },
                            cum_logprob: parent.cum_logprob
                                + if source == TacticSource::Symbolic {
                                    0.0
                                } else {
                                    candidate.logprob
                                },
                            depth: parent.depth + 1,
                            goal_pretty,
                        };
                        let node_score = node.score(self.budget.normalization_exponent);
                        frontier.push(node.node_id, node_score);
                        nodes.push(node);
                        children += 1;
                    }
                }
            }
            result.telemetry.max_children_per_expansion =
                result.telemetry.max_children_per_expansion.max(children);
        }
    }
}

fn path_tactics(nodes: &[SearchNode], mut id: u32) -> Vec<String> {
    let mut tactics = Vec::new();
    while let Some(node) = nodes.get(id as usize) {
        if node.parent.is_none() {
            break;
        }
        tactics.push(node.tactic.clone());
        id = node.parent.expect("checked");
    }
    tactics.reverse();
    tactics
}

fn is_ancestor_state(nodes: &[SearchNode], mut id: u32, goal_pretty: &str) -> bool {
    loop {
        let node = &nodes[id as usize];
        if node.goal_pretty == goal_pretty {
            return true;
        }
        match node.parent {
            Some(parent) => id = parent,
            None => return false,
        }
    }
}
