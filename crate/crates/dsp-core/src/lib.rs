//! Shared domain types for the draft-sketch-prove workflow.
//!
//! Everything here is an immutable value object: statements, sampling
//! configuration, drafts, sketches, and attempt records. Phase logic
//! (parsing, masking, search) lives in the downstream crates; this crate
//! only defines the data those phases exchange and persist.

mod attempt;
mod config;
mod deadline;
mod diagnostic;
mod draft;
mod error;
mod sketch;
mod statement;
mod tokens;

pub use attempt::{new_attempt_id, AttemptRecord, Outcome};
pub use deadline::Deadline;
pub use config::{config_hash, DraftFormat, PhaseConfig, SamplingParams};
pub use diagnostic::{Diagnostic, Severity};
pub use draft::{Draft, DraftStep};
pub use error::CoreError;
pub use sketch::{LineKind, LineStatus, Sketch, SketchLine, Strategy, SubgoalHole};
pub use statement::FormalStatement;
pub use tokens::TokenUsage;
