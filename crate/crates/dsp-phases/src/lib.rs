//! The draft and sketch phases of the workflow.
//!
//! Drafting turns a reasoning-model completion into numbered key-formula
//! steps. Sketching parses the autoformalized proof skeleton into classified
//! lines with identifier tracking, rewrites `prove_with` placeholders into
//! checker-acceptable `sorry` sites, and iteratively repairs syntax errors
//! by masking: ill-formed subgoal declarations are commented out with their
//! dependents, erroneous proof lines are replaced by the placeholder.

mod draft;
mod error;
mod mask;
mod parse;
mod repair;

pub use draft::{parse_draft_steps, run_draft, split_token_usage, ParsedSteps};
pub use error::PhaseError;
pub use mask::{mask_errors, MaskOutcome};
pub use parse::{extract_lean_block, parse_sketch, rewrite_placeholders, strip_repeated_header};
pub use repair::{repair_loop, translation_rate, RepairOptions, RepairReport};
