//! Budgeted best-first tactic tree search.
//!
//! Each subgoal hole is attacked strategy by strategy (hinted hypotheses
//! first, then the full context), with the attempt budget split between
//! them. One attempt expands a max-score frontier: the symbolic tactic
//! portfolio is tried first at every expansion, then up to `width` tactics
//! sampled from the step prover, deduplicated textually, keeping at most
//! `beam` successful distinct child states. Scores are length-normalized
//! cumulative log-probabilities; symbolic tactics score zero.

mod assemble;
mod budget;
mod engine;
mod error;
mod frontier;
mod node;
mod proposer;
pub mod scripted;

pub use assemble::{assemble_proof, AssembledProof};
pub use budget::{default_symbolic_tactics, SearchBudget};
pub use engine::{SearchEngine, SubgoalResult, SubgoalStatus, Telemetry};
pub use error::SearchError;
pub use node::{score, SearchNode, TacticSource};
pub use proposer::{ModelProposer, Proposals, ScoredTactic, TacticProposer};
