//! The pipelined, buffered benchmark runner.
//!
//! Three worker pools (draft, sketch, prove) connected by bounded queues
//! give backpressure; a feeder thread admits work, and the coordinator
//! persists records through a single writer while scheduling ensemble
//! stages per statement. An attempt's prove phase cannot start before its
//! sketch repair completed — the stages only communicate over the queues.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use crossbeam::channel::{bounded, unbounded, Sender};
use parking_lot::Mutex;

use dsp_core::{
    new_attempt_id, AttemptRecord, Deadline, FormalStatement, Outcome, PhaseConfig, TokenUsage,
};
use dsp_verifier::{StateHandle, VerifierSession};

use crate::attempt::{draft_stage, prove_stage, sketch_stage, StageFailure};
use crate::{AttemptStore, EnsemblePlan, OrchestratorError, RunContext};

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    /// Capacity of each inter-stage queue.
    pub queue_capacity: usize,
    pub draft_workers: usize,
    pub sketch_workers: usize,
    pub prove_workers: usize,
    /// Wall-clock budget per attempt, from draft pickup to record.
    pub attempt_budget: Duration,
    pub stop_on_success: bool,
    /// Keep an ordered event log (tests assert scheduling invariants on it).
    pub record_events: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            queue_capacity: 32,
            draft_workers: 2,
            sketch_workers: 2,
            prove_workers: 2,
            attempt_budget: Duration::from_secs(2400),
            stop_on_success: true,
            record_events: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PipelineEvent {
    AttemptStarted { attempt_id: String, statement_id: String },
    SketchCompleted { attempt_id: String },
    ProveStarted { attempt_id: String },
    AttemptSkipped { attempt_id: String, statement_id: String },
    RecordPersisted { attempt_id: String, statement_id: String, outcome: Outcome },
    StatementSolved { statement_id: String },
}

#[derive(Debug, Default)]
pub struct PipelineReport {
    pub records_persisted: usize,
    /// Units skipped because the store already held their records.
    pub resumed: usize,
    /// Units skipped because their statement was solved mid-stage.
    pub skipped_after_solve: usize,
    pub solved_statements: usize,
    pub events: Vec<PipelineEvent>,
}

/// Shared solve-state and event log. One lock guards both so the event
/// order is a consistent linearization: a worker's started/skipped decision
/// and the coordinator's solved mark cannot interleave.
struct Tracker {
    inner: Mutex<TrackerInner>,
    record_events: bool,
    stop_on_success: bool,
}

#[derive(Default)]
struct TrackerInner {
    solved: std::collections::HashSet<String>,
    events: Vec<PipelineEvent>,
}

impl Tracker {
    fn check_start(&self, attempt_id: &str, statement_id: &str) -> bool {
        let mut inner = self.inner.lock();
        if self.stop_on_success && inner.solved.contains(statement_id) {
            if self.record_events {
                inner.events.push(PipelineEvent::AttemptSkipped {
                    attempt_id: attempt_id.to_string(),
                    statement_id: statement_id.to_string(),
                });
            }
            false
        } else {
            if self.record_events {
                inner.events.push(PipelineEvent::AttemptStarted {
                    attempt_id: attempt_id.to_string(),
                    statement_id: statement_id.to_string(),
                });
            }
            true
        }
    }

    fn push(&self, event: PipelineEvent) {
        if self.record_events {
            self.inner.lock().events.push(event);
        }
    }

    fn mark_solved(&self, statement_id: &str) {
        let mut inner = self.inner.lock();
        if inner.solved.insert(statement_id.to_string()) && self.record_events {
            inner.events.push(PipelineEvent::StatementSolved {
                statement_id: statement_id.to_string(),
            });
        }
    }
}

struct Unit {
    stmt: Arc<FormalStatement>,
    config: Arc<PhaseConfig>,
    stage_idx: usize,
    k_index: u64,
}

impl Unit {
    fn attempt_id(&self) -> String {
        new_attempt_id(&self.stmt.id, &self.config.hash(), self.k_index)
    }
}

struct Drafted {
    unit: Unit,
    record: AttemptRecord,
    started: Instant,
    deadline: Deadline,
}

struct Sketched {
    drafted: Drafted,
    session: VerifierSession,
    goals: Vec<(u32, StateHandle, String)>,
}

enum Completion {
    Persist { stage_idx: usize, record: Box<AttemptRecord> },
    Skipped { statement_id: String, stage_idx: usize },
}

fn blank_record(unit: &Unit) -> AttemptRecord {
    AttemptRecord {
        attempt_id: unit.attempt_id(),
        statement_id: unit.stmt.id.clone(),
        config: (*unit.config).clone(),
        draft: None,
        sketch: None,
        outcome: Outcome::SketchFailed,
        proof_text: None,
        tokens: TokenUsage::default(),
        wall_clock_secs: 0.0,
        prover_samples: 0,
        failure_reason: None,
        created_at: Some(chrono::Utc::now().to_rfc3339()),
    }
}

fn finish(mut record: AttemptRecord, started: Instant, failure: StageFailure) -> AttemptRecord {
    record.outcome = failure.outcome;
    record.failure_reason = Some(failure.reason);
    record.wall_clock_secs = started.elapsed().as_secs_f64();
    record
}

/// Per-statement scheduling state.
struct StmtProgress {
    stage: usize,
    pending: u64,
    solved: bool,
    done: bool,
}

/// Run an ensemble plan over a benchmark through the pipelined stages,
/// persisting every record. With `resume`, statements already proved in
/// the store are skipped entirely and recorded attempts are not re-run.
pub fn run_plan(
    ctx: &RunContext,
    statements: &[FormalStatement],
    plan: &EnsemblePlan,
    store: &AttemptStore,
    config: &PipelineConfig,
    resume: bool,
) -> Result<PipelineReport, OrchestratorError> {
    plan.validate()?;
    let mut report = PipelineReport::default();
    let tracker = Arc::new(Tracker {
        inner: Mutex::new(TrackerInner::default()),
        record_events: config.record_events,
        stop_on_success: config.stop_on_success,
    });

    let stage_configs: Vec<Arc<PhaseConfig>> = plan
        .stages
        .iter()
        .map(|s| Arc::new(s.config.clone()))
        .collect();

    let proved_already = store.proved_statements();
    let mut progress: HashMap<String, StmtProgress> = HashMap::new();
    let mut open_statements = 0usize;

    // Unbounded admission queue; the feeder moves units into the bounded
    // draft queue so the coordinator never blocks on backpressure.
    let (schedule_tx, schedule_rx) = unbounded::<Unit>();
    let (draft_tx, draft_rx) = bounded::<Unit>(config.queue_capacity);
    let (sketch_tx, sketch_rx) = bounded::<Drafted>(config.queue_capacity);
    let (prove_tx, prove_rx) = bounded::<Sketched>(config.queue_capacity);
    let (done_tx, done_rx) = unbounded::<Completion>();

    // Emit every not-yet-recorded unit of `stage` for one statement;
    // returns how many are in flight (0 means the stage is already fully
    // recorded and the scheduler should look at the next stage).
    let emit_stage = |stmt: &Arc<FormalStatement>,
                      stage_idx: usize,
                      schedule_tx: &Sender<Unit>,
                      resumed: &mut usize|
     -> u64 {
        let stage = &plan.stages[stage_idx];
        let config_hash = stage.config.hash();
        let mut emitted = 0;
        for k_index in 0..stage.k {
            let attempt_id = new_attempt_id(&stmt.id, &config_hash, k_index);
            if resume && store.has_attempt(&attempt_id) {
                *resumed += 1;
                continue;
            }
            schedule_tx
                .send(Unit {
                    stmt: stmt.clone(),
                    config: stage_configs[stage_idx].clone(),
                    stage_idx,
                    k_index,
                })
                .expect("feeder alive");
            emitted += 1;
        }
        emitted
    };

    // Seed stage 0 (or the first stage with unrecorded work).
    for stmt in statements {
        if resume && proved_already.contains(&stmt.id) {
            tracker.mark_solved(&stmt.id);
            report.solved_statements += 1;
            continue;
        }
        let arc = Arc::new(stmt.clone());
        let mut stage_idx = 0;
        let mut pending = 0;
        while stage_idx < plan.stages.len() {
            pending = emit_stage(&arc, stage_idx, &schedule_tx, &mut report.resumed);
            if pending > 0 {
                break;
            }
            stage_idx += 1;
        }
        if stage_idx == plan.stages.len() {
            continue; // everything recorded, nothing proved
        }
        progress.insert(
            stmt.id.clone(),
            StmtProgress {
                stage: stage_idx,
                pending,
                solved: false,
                done: false,
            },
        );
        open_statements += 1;
    }

    let statements_by_id: HashMap<String, Arc<FormalStatement>> = statements
        .iter()
        .map(|s| (s.id.clone(), Arc::new(s.clone())))
        .collect();

    std::thread::scope(|scope| -> Result<(), OrchestratorError> {
        // Feeder: admission with backpressure.
        scope.spawn({
            let draft_tx = draft_tx.clone();
            move || {
                for unit in schedule_rx {
                    if draft_tx.send(unit).is_err() {
                        break;
                    }
                }
            }
        });
        drop(draft_tx);

        for _ in 0..config.draft_workers.max(1) {
            let draft_rx = draft_rx.clone();
            let sketch_tx = sketch_tx.clone();
            let done_tx = done_tx.clone();
            let tracker = tracker.clone();
            let attempt_budget = config.attempt_budget;
            scope.spawn(move || {
                for unit in draft_rx {
                    let attempt_id = unit.attempt_id();
                    if !tracker.check_start(&attempt_id, &unit.stmt.id) {
                        let _ = done_tx.send(Completion::Skipped {
                            statement_id: unit.stmt.id.clone(),
                            stage_idx: unit.stage_idx,
                        });
                        continue;
                    }
                    let started = Instant::now();
                    let deadline = Deadline::after(attempt_budget);
                    let mut record = blank_record(&unit);
                    match draft_stage(ctx, &unit.stmt, &unit.config, unit.k_index, deadline) {
                        Ok(stage) => {
                            record.tokens.add(&stage.tokens);
                            record.draft = stage.draft;
                            let _ = sketch_tx.send(Drafted {
                                unit,
                                record,
                                started,
                                deadline,
                            });
                        }
                        Err(failure) => {
                            let _ = done_tx.send(Completion::Persist {
                                stage_idx: unit.stage_idx,
                                record: Box::new(finish(record, started, failure)),
                            });
                        }
                    }
                }
            });
        }
        drop(sketch_tx);

        for _ in 0..config.sketch_workers.max(1) {
            let sketch_rx = sketch_rx.clone();
            let prove_tx = prove_tx.clone();
            let done_tx = done_tx.clone();
            let tracker = tracker.clone();
            scope.spawn(move || {
                for mut drafted in sketch_rx {
                    match sketch_stage(
                        ctx,
                        &drafted.unit.stmt,
                        &drafted.unit.config,
                        drafted.unit.k_index,
                        drafted.record.draft.as_ref(),
                        drafted.deadline,
                    ) {
                        Ok(stage) => {
                            drafted.record.tokens.add(&stage.tokens);
                            drafted.record.sketch = Some(stage.sketch);
                            tracker.push(PipelineEvent::SketchCompleted {
                                attempt_id: drafted.record.attempt_id.clone(),
                            });
                            let _ = prove_tx.send(Sketched {
                                drafted,
                                session: stage.session,
                                goals: stage.goals,
                            });
                        }
                        Err(failure) => {
                            let stage_idx = drafted.unit.stage_idx;
                            let started = drafted.started;
                            let _ = done_tx.send(Completion::Persist {
                                stage_idx,
                                record: Box::new(finish(drafted.record, started, failure)),
                            });
                        }
                    }
                }
            });
        }
        drop(prove_tx);

        for _ in 0..config.prove_workers.max(1) {
            let prove_rx = prove_rx.clone();
            let done_tx = done_tx.clone();
            let tracker = tracker.clone();
            scope.spawn(move || {
                for sketched in prove_rx {
                    let Sketched {
                        drafted,
                        session,
                        goals,
                    } = sketched;
                    let mut record = drafted.record;
                    tracker.push(PipelineEvent::ProveStarted {
                        attempt_id: record.attempt_id.clone(),
                    });
                    let sketch = record.sketch.clone().expect("sketch stage filled it");
                    let proved = prove_stage(
                        ctx,
                        &drafted.unit.config,
                        drafted.unit.k_index,
                        &sketch,
                        &session,
                        &goals,
                        drafted.deadline,
                    );
                    record.tokens.add(&proved.tokens);
                    record.prover_samples = proved.prover_samples;
                    record.outcome = proved.outcome;
                    record.proof_text = proved.proof_text;
                    record.failure_reason = proved.failure_reason;
                    record.wall_clock_secs = drafted.started.elapsed().as_secs_f64();
                    let _ = done_tx.send(Completion::Persist {
                        stage_idx: drafted.unit.stage_idx,
                        record: Box::new(record),
                    });
                }
            });
        }
        drop(done_tx);

        // Coordinator: single persistence writer + stage scheduler.
        let mut schedule_tx = Some(schedule_tx);
        if open_statements == 0 {
            // Nothing to run (e.g. resuming a finished run): close admission
            // immediately so the worker cascade shuts down.
            schedule_tx = None;
        }
        for completion in done_rx {
            let (statement_id, stage_idx, persisted) = match completion {
                Completion::Persist { stage_idx, record } => {
                    let statement_id = record.statement_id.clone();
                    let proved = record.outcome == Outcome::Proved;
                    if proved {
                        // Mark before persisting: no new attempt may start
                        // after a proved record is persisted.
                        tracker.mark_solved(&statement_id);
                    }
                    store.append(&record)?;
                    report.records_persisted += 1;
                    tracker.push(PipelineEvent::RecordPersisted {
                        attempt_id: record.attempt_id.clone(),
                        statement_id: statement_id.clone(),
                        outcome: record.outcome,
                    });
                    (statement_id, stage_idx, true)
                }
                Completion::Skipped {
                    statement_id,
                    stage_idx,
                } => {
                    report.skipped_after_solve += 1;
                    (statement_id, stage_idx, false)
                }
            };
            let _ = persisted;

            let Some(state) = progress.get_mut(&statement_id) else {
                continue;
            };
            if stage_idx != state.stage {
                continue;
            }
            state.pending = state.pending.saturating_sub(1);
            let solved_now = tracker.inner.lock().solved.contains(&statement_id);
            if solved_now && !state.solved {
                state.solved = true;
                report.solved_statements += 1;
            }
            if state.pending == 0 && !state.done {
                if state.solved && config.stop_on_success {
                    state.done = true;
                } else {
                    // Advance to the next stage with work, if any.
                    let stmt = statements_by_id
                        .get(&statement_id)
                        .expect("statement known")
                        .clone();
                    let mut next = state.stage + 1;
                    let mut emitted = 0;
                    while next < plan.stages.len() {
                        if let Some(tx) = schedule_tx.as_ref() {
                            emitted = emit_stage(&stmt, next, tx, &mut report.resumed);
                        }
                        if emitted > 0 {
                            break;
                        }
                        next += 1;
                    }
                    if emitted > 0 {
                        state.stage = next;
                        state.pending = emitted;
                    } else {
                        state.done = true;
                    }
                }
                if state.done {
                    open_statements -= 1;
                    if open_statements == 0 {
                        // No more stages will ever be scheduled.
                        schedule_tx = None;
                    }
                }
            }
        }
        Ok(())
    })?;

    report.events = std::mem::take(&mut tracker.inner.lock().events);
    Ok(report)
}
