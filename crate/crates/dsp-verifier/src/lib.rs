//! Proof-checker backends behind one [`Verifier`] trait.
//!
//! Two strategies ship in the registry: `repl` drives a real checker
//! process pool over a newline-delimited JSON wire protocol with header
//! environments loaded once per distinct header, and `mock` resolves
//! everything from scripted fixture tables so the whole workflow runs
//! deterministically offline.

mod error;
mod mock;
mod pool;
mod registry;
mod repl;
mod types;
mod wire;

pub use error::VerifierError;
pub use mock::{MockFixture, MockRule, MockState, MockTransition, MockVerifier, VerifyDelay};
pub use pool::{header_fingerprint, HeaderPool};
pub use registry::{VerifierConfig, VerifierRegistry};
pub use repl::{ReplConfig, ReplVerifier};
pub use types::{
    RemainingGoal, StateHandle, TacticOutcome, TacticResult, Verifier, VerifierSession,
    VerifyResult,
};
pub use wire::{ReplMessage, ReplPos, ReplRequest, ReplResponse, ReplSorry};
