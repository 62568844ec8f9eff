//! Pass@k loops and ensemble stage scheduling for a single statement.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use dsp_core::{AttemptRecord, FormalStatement, Outcome, PhaseConfig};

use crate::{run_attempt, OrchestratorError, RunContext};

fn default_stop_on_success() -> bool {
    true
}

/// One ensemble stage: a phase-model configuration and its attempt budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanStage {
    pub config: PhaseConfig,
    pub k: u64,
}

/// Ordered model combinations tried one by one until proved or exhausted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsemblePlan {
    pub stages: Vec<PlanStage>,
    #[serde(default = "default_stop_on_success")]
    pub stop_on_success: bool,
}

impl EnsemblePlan {
    pub fn single(config: PhaseConfig, k: u64) -> Self {
        EnsemblePlan {
            stages: vec![PlanStage { config, k }],
            stop_on_success: true,
        }
    }

    pub fn validate(&self) -> Result<(), OrchestratorError> {
        if self.stages.is_empty() {
            return Err(OrchestratorError::InvalidPlan("no stages".into()));
        }
        for (i, stage) in self.stages.iter().enumerate() {
            if stage.k < 1 {
                return Err(OrchestratorError::InvalidPlan(format!("stage {i}: k < 1")));
            }
            stage
                .config
                .validate()
                .map_err(|e| OrchestratorError::InvalidPlan(format!("stage {i}: {e}")))?;
        }
        Ok(())
    }
}

#[derive(Debug)]
pub struct PassAtKOutcome {
    pub solved: bool,
    pub attempts: Vec<AttemptRecord>,
}

/// Up to `k` independent attempts with fresh sampling each, stopping early
/// at the first proof when `stop_on_success`. With `parallelism > 1`
/// attempts fan out across threads; records come back ordered by attempt
/// index either way.
pub fn run_pass_at_k(
    ctx: &RunContext,
    stmt: &FormalStatement,
    config: &PhaseConfig,
    k: u64,
    attempt_budget: Duration,
    stop_on_success: bool,
    parallelism: usize,
) -> PassAtKOutcome {
    let mut attempts = Vec::new();
    if parallelism <= 1 {
        for k_index in 0..k {
            let record = run_attempt(ctx, stmt, config, k_index, attempt_budget);
            let proved = record.outcome == Outcome::Proved;
            attempts.push(record);
            if proved && stop_on_success {
                break;
            }
        }
    } else {
        let next = AtomicU64::new(0);
        let solved = AtomicBool::new(false);
        let collected = parking_lot::Mutex::new(Vec::new());
        std::thread::scope(|scope| {
            for _ in 0..parallelism.min(k as usize) {
                scope.spawn(|| loop {
                    if stop_on_success && solved.load(Ordering::SeqCst) {
                        break;
                    }
                    let k_index = next.fetch_add(1, Ordering::SeqCst);
                    if k_index >= k {
                        break;
                    }
                    let record = run_attempt(ctx, stmt, config, k_index, attempt_budget);
                    if record.outcome == Outcome::Proved {
                        solved.store(true, Ordering::SeqCst);
                    }
                    collected.lock().push(record);
                });
            }
        });
        attempts = collected.into_inner();
        attempts.sort_by_key(|r| r.k_index());
    }
    let solved = attempts.iter().any(|r| r.outcome == Outcome::Proved);
    PassAtKOutcome { solved, attempts }
}

#[derive(Debug)]
pub struct EnsembleOutcome {
    /// 1-based index of the stage that proved the statement.
    pub solved_by: Option<usize>,
    pub attempts: Vec<AttemptRecord>,
}

/// Run the plan's stages in order; the first stage that proves the
/// statement stops the plan (unless `stop_on_success` is off, in which
/// case every stage runs and the union of outcomes is recorded).
pub fn run_ensemble(
    ctx: &RunContext,
    stmt: &FormalStatement,
    plan: &EnsemblePlan,
    attempt_budget: Duration,
    parallelism: usize,
) -> EnsembleOutcome {
    let mut attempts = Vec::new();
    let mut solved_by = None;
    for (i, stage) in plan.stages.iter().enumerate() {
        let outcome = run_pass_at_k(
            ctx,
            stmt,
            &stage.config,
            stage.k,
            attempt_budget,
            plan.stop_on_success,
            parallelism,
        );
        let stage_solved = outcome.solved;
        attempts.extend(outcome.attempts);
        if stage_solved {
            solved_by.get_or_insert(i + 1);
            if plan.stop_on_success {
                break;
            }
        }
    }
    EnsembleOutcome { solved_by, attempts }
}
