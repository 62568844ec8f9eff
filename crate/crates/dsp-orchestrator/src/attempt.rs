//! One workflow attempt: draft, sketch (render → verify → repair), prove
//! every hole, assemble, and account tokens and timing. Each stage is a
//! standalone function so the pipelined runner and the serial runner share
//! the same code paths.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use dsp_core::{
    new_attempt_id, AttemptRecord, Deadline, Draft, FormalStatement, Outcome, PhaseConfig,
    SamplingParams, Sketch, TokenUsage,
};
use dsp_gateway::{
    render_sketch_prompt, strip_thinking_with, ModelBackend, ModelEndpoint, ThinkingMarkers,
};
use dsp_phases::{
    extract_lean_block, parse_sketch, repair_loop, rewrite_placeholders, run_draft,
    split_token_usage, strip_repeated_header, PhaseError, RepairOptions,
};
use dsp_search::{
    assemble_proof, ModelProposer, SearchBudget, SearchEngine, SubgoalResult, SubgoalStatus,
    TacticProposer,
};
use dsp_verifier::{StateHandle, Verifier, VerifierSession};

use crate::OrchestratorError;

/// Everything an attempt needs that outlives it: the model backend, the
/// endpoint table, the verifier, and the search settings.
pub struct RunContext {
    pub backend: Arc<dyn ModelBackend>,
    pub endpoints: BTreeMap<String, ModelEndpoint>,
    pub verifier: Arc<dyn Verifier>,
    pub budget: SearchBudget,
    pub symbolic_tactics: Vec<String>,
    pub thinking_markers: ThinkingMarkers,
    pub repair: RepairOptions,
    /// Timeout for the final whole-proof verification.
    pub verify_timeout: Duration,
}

impl RunContext {
    fn endpoint(&self, model: &str) -> Result<&ModelEndpoint, OrchestratorError> {
        self.endpoints
            .get(model)
            .ok_or_else(|| OrchestratorError::UnknownEndpoint(model.to_string()))
    }

    /// Per-attempt sampling: the attempt index shifts the seed so
    /// independent attempts sample freshly while identical phase calls
    /// across ensemble stages share one transcript entry.
    fn seeded(&self, config: &PhaseConfig, model: &str, k_index: u64) -> SamplingParams {
        let base = config.sampling_for(model);
        let seed = base.seed.unwrap_or(0) + k_index;
        base.with_seed(seed)
    }
}

pub(crate) struct StageFailure {
    pub outcome: Outcome,
    pub reason: String,
}

impl StageFailure {
    fn new(outcome: Outcome, reason: impl Into<String>) -> Self {
        StageFailure {
            outcome,
            reason: reason.into(),
        }
    }
}

pub(crate) struct DraftStage {
    pub draft: Option<Draft>,
    pub tokens: TokenUsage,
}

pub(crate) fn draft_stage(
    ctx: &RunContext,
    stmt: &FormalStatement,
    config: &PhaseConfig,
    k_index: u64,
    deadline: Deadline,
) -> Result<DraftStage, StageFailure> {
    let Some(model) = config.draft_model.as_deref() else {
        return Ok(DraftStage {
            draft: None,
            tokens: TokenUsage::default(),
        });
    };
    if deadline.expired() {
        return Err(StageFailure::new(Outcome::Timeout, "deadline before draft"));
    }
    let endpoint = ctx
        .endpoint(model)
        .map_err(|e| StageFailure::new(Outcome::DraftFailed, e.to_string()))?;
    let mut seeded_config = config.clone();
    seeded_config
        .sampling
        .insert(model.to_string(), ctx.seeded(config, model, k_index));
    match run_draft(stmt, &seeded_config, ctx.backend.as_ref(), endpoint, &ctx.thinking_markers) {
        Ok(draft) => {
            let tokens = draft.tokens.clone();
            Ok(DraftStage {
                draft: Some(draft),
                tokens,
            })
        }
        Err(e) => Err(StageFailure::new(Outcome::DraftFailed, e.to_string())),
    }
}

pub(crate) struct SketchStage {
    pub sketch: Sketch,
    pub session: VerifierSession,
    /// (hole_id, root state, goal pretty-print) for every hole.
    pub goals: Vec<(u32, StateHandle, String)>,
    pub tokens: TokenUsage,
}

pub(crate) fn sketch_stage(
    ctx: &RunContext,
    stmt: &FormalStatement,
    config: &PhaseConfig,
    k_index: u64,
    draft: Option<&Draft>,
    deadline: Deadline,
) -> Result<SketchStage, StageFailure> {
    if deadline.expired() {
        return Err(StageFailure::new(Outcome::Timeout, "deadline before sketch"));
    }
    let model = config.sketch_model.as_str();
    let endpoint = ctx
        .endpoint(model)
        .map_err(|e| StageFailure::new(Outcome::SketchFailed, e.to_string()))?;
    let messages = render_sketch_prompt(stmt, draft)
        .map_err(|e| StageFailure::new(Outcome::SketchFailed, e.to_string()))?;
    let sampling = ctx.seeded(config, model, k_index);
    let completions = ctx
        .backend
        .complete(endpoint, &messages, &sampling)
        .map_err(|e| StageFailure::new(Outcome::SketchFailed, e.to_string()))?;
    let completion = completions
        .first()
        .ok_or_else(|| StageFailure::new(Outcome::SketchFailed, "no sketch completion"))?;

    let answer = strip_thinking_with(&completion.content, &ctx.thinking_markers);
    let (answer_tokens, thinking_tokens) = split_token_usage(completion.tokens, &answer);
    let mut tokens = TokenUsage::default();
    tokens.record_chat(model, answer_tokens, thinking_tokens);

    let code = strip_repeated_header(&extract_lean_block(&answer), stmt);
    if code.trim().is_empty() {
        return Err(StageFailure::new(Outcome::SketchFailed, "empty sketch output"));
    }
    let mut sketch = rewrite_placeholders(parse_sketch(&stmt.id, &code));

    let session = ctx.verifier.open_session(&stmt.header).map_err(|e| {
        StageFailure::new(Outcome::SketchFailed, format!("verifier-unavailable: {e}"))
    })?;
    let report = repair_loop(&mut sketch, ctx.verifier.as_ref(), &session, deadline, &ctx.repair)
        .map_err(|e| match e {
            PhaseError::DeadlineExceeded => StageFailure::new(Outcome::Timeout, e.to_string()),
            other => StageFailure::new(Outcome::SketchFailed, other.to_string()),
        })?;

    // Pair every hole with its proof state from the final verification.
    let (_, line_map) = sketch.render_with_line_map();
    let mut goals = Vec::new();
    for goal in &report.final_verify.remaining_goals {
        let Some(&line_index) = line_map.get(goal.line.wrapping_sub(1)) else {
            continue;
        };
        if let Some(hole) = sketch.holes.iter().find(|h| h.line_index == line_index) {
            goals.push((hole.hole_id, goal.goal_id.clone(), goal.goal_pretty.clone()));
        }
    }
    Ok(SketchStage {
        sketch,
        session,
        goals,
        tokens,
    })
}

pub(crate) struct ProveStage {
    pub outcome: Outcome,
    pub proof_text: Option<String>,
    pub prover_samples: u64,
    pub tokens: TokenUsage,
    pub failure_reason: Option<String>,
}

pub(crate) fn prove_stage(
    ctx: &RunContext,
    config: &PhaseConfig,
    k_index: u64,
    sketch: &Sketch,
    session: &VerifierSession,
    goals: &[(u32, StateHandle, String)],
    deadline: Deadline,
) -> ProveStage {
    let mut tokens = TokenUsage::default();
    let proposer: Option<Box<dyn TacticProposer>> = match config.prover_model.as_deref() {
        Some(model) => match ctx.endpoint(model) {
            Ok(endpoint) => Some(Box::new(ModelProposer::new(
                ctx.backend.clone(),
                endpoint.clone(),
                ctx.seeded(config, model, k_index),
            ))),
            Err(e) => {
                return ProveStage {
                    outcome: Outcome::SketchFailed,
                    proof_text: None,
                    prover_samples: 0,
                    tokens,
                    failure_reason: Some(e.to_string()),
                }
            }
        },
        None => None,
    };

    let engine = SearchEngine::new(ctx.budget.clone(), ctx.symbolic_tactics.clone());
    let mut results: Vec<SubgoalResult> = Vec::new();
    let mut samples = 0u64;
    let mut timed_out = false;
    for hole in &sketch.holes {
        if deadline.expired() {
            timed_out = true;
            break;
        }
        let Some((_, root, goal_pretty)) = goals.iter().find(|(id, _, _)| *id == hole.hole_id)
        else {
            tracing::warn!(hole = hole.hole_id, "no proof state for hole; left open");
            continue;
        };
        let result = engine.prove_subgoal(
            hole,
            root,
            goal_pretty,
            ctx.verifier.as_ref(),
            session,
            proposer.as_deref(),
            deadline,
        );
        samples += result.samples_used;
        if result.prover_tokens > 0 {
            if let Some(model) = config.prover_model.as_deref() {
                tokens.record_prover(model, result.prover_tokens);
            }
        }
        if result.status == SubgoalStatus::Timeout {
            timed_out = true;
            results.push(result);
            break;
        }
        results.push(result);
    }

    if timed_out || deadline.expired() {
        return ProveStage {
            outcome: Outcome::Timeout,
            proof_text: None,
            prover_samples: samples,
            tokens,
            failure_reason: Some("statement deadline exceeded during proving".into()),
        };
    }

    // Holes without results (missing proof states) count as unproved.
    let proved_holes = results
        .iter()
        .filter(|r| matches!(r.status, SubgoalStatus::Proved { .. }))
        .count();
    for hole in &sketch.holes {
        if !results.iter().any(|r| r.hole_id == hole.hole_id) {
            results.push(SubgoalResult {
                hole_id: hole.hole_id,
                status: SubgoalStatus::Exhausted,
                samples_used: 0,
                nodes_expanded: 0,
                strategy_used: None,
                prover_tokens: 0,
                telemetry: Default::default(),
            });
        }
    }

    match assemble_proof(sketch, &results, ctx.verifier.as_ref(), session, deadline, ctx.verify_timeout)
    {
        Ok(assembled) => {
            let outcome = if assembled.proved {
                Outcome::Proved
            } else if !sketch.holes.is_empty() && proved_holes == 0 {
                // Nothing was discharged: the subgoal budget ran dry.
                Outcome::BudgetExhausted
            } else {
                Outcome::Partial
            };
            ProveStage {
                outcome,
                proof_text: Some(assembled.proof_text),
                prover_samples: samples,
                tokens,
                failure_reason: assembled.splice_mismatch.then(|| "splice_mismatch".to_string()),
            }
        }
        Err(e) => ProveStage {
            outcome: Outcome::Timeout,
            proof_text: None,
            prover_samples: samples,
            tokens,
            failure_reason: Some(format!("final verification failed: {e}")),
        },
    }
}

/// Run one full attempt. Any phase failure short-circuits with the
/// corresponding outcome; partial artifacts are retained on the record.
pub fn run_attempt(
    ctx: &RunContext,
    stmt: &FormalStatement,
    config: &PhaseConfig,
    k_index: u64,
    budget: Duration,
) -> AttemptRecord {
    let started = Instant::now();
    let deadline = Deadline::after(budget);
    let mut record = AttemptRecord {
        attempt_id: new_attempt_id(&stmt.id, &config.hash(), k_index),
        statement_id: stmt.id.clone(),
        config: config.clone(),
        draft: None,
        sketch: None,
        outcome: Outcome::SketchFailed,
        proof_text: None,
        tokens: TokenUsage::default(),
        wall_clock_secs: 0.0,
        prover_samples: 0,
        failure_reason: None,
        created_at: Some(chrono::Utc::now().to_rfc3339()),
    };

    let draft = match draft_stage(ctx, stmt, config, k_index, deadline) {
        Ok(stage) => {
            record.tokens.add(&stage.tokens);
            record.draft = stage.draft;
            record.draft.clone()
        }
        Err(failure) => {
            record.outcome = failure.outcome;
            record.failure_reason = Some(failure.reason);
            record.wall_clock_secs = started.elapsed().as_secs_f64();
            return record;
        }
    };

    let sketch_out = match sketch_stage(ctx, stmt, config, k_index, draft.as_ref(), deadline) {
        Ok(stage) => {
            record.tokens.add(&stage.tokens);
            record.sketch = Some(stage.sketch.clone());
            stage
        }
        Err(failure) => {
            record.outcome = failure.outcome;
            record.failure_reason = Some(failure.reason);
            record.wall_clock_secs = started.elapsed().as_secs_f64();
            return record;
        }
    };

    let proved = prove_stage(
        ctx,
        config,
        k_index,
        &sketch_out.sketch,
        &sketch_out.session,
        &sketch_out.goals,
        deadline,
    );
    record.tokens.add(&proved.tokens);
    record.prover_samples = proved.prover_samples;
    record.outcome = proved.outcome;
    record.proof_text = proved.proof_text;
    record.failure_reason = proved.failure_reason;
    record.wall_clock_secs = started.elapsed().as_secs_f64();
    if let Err(e) = record.validate() {
        tracing::error!("attempt record failed validation: {e}");
    }
    record
}
