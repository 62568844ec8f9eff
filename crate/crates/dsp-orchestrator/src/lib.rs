//! Drives the three phases as a pipelined, buffered workflow: pass@k
//! attempt loops, ensemble stage scheduling, bounded-queue stage workers,
//! and crash-safe attempt persistence.

mod attempt;
mod error;
mod pipeline;
mod plan;
mod store;

pub use attempt::{run_attempt, RunContext};
pub use error::OrchestratorError;
pub use pipeline::{run_plan, PipelineConfig, PipelineEvent, PipelineReport};
pub use plan::{run_ensemble, run_pass_at_k, EnsembleOutcome, EnsemblePlan, PassAtKOutcome, PlanStage};
pub use store::AttemptStore;
