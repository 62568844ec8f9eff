use std::time::Duration;

use serde::{Deserialize, Serialize};

use dsp_core::Diagnostic;

use crate::VerifierError;

/// Opaque proof-state token, valid within the session that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StateHandle(pub String);

impl StateHandle {
    pub fn new(id: impl Into<String>) -> Self {
        StateHandle(id.into())
    }
}

/// A checker session bound to a preloaded header environment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifierSession {
    pub session_id: u64,
    /// Opaque token for the preloaded header environment.
    pub environment_handle: u64,
    pub header_fingerprint: String,
}

/// One placeholder goal left open by a verification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemainingGoal {
    /// Usable as the root state for tactic application.
    pub goal_id: StateHandle,
    pub goal_pretty: String,
    /// 1-based line of the placeholder in the verified source.
    pub line: usize,
    #[serde(default)]
    pub column: usize,
}

/// Outcome of verifying a whole source text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyResult {
    pub diagnostics: Vec<Diagnostic>,
    pub remaining_goals: Vec<RemainingGoal>,
    pub elapsed_secs: f64,
}

impl VerifyResult {
    pub fn error_diagnostics(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.is_error())
    }

    pub fn has_errors(&self) -> bool {
        self.error_diagnostics().next().is_some()
    }

    /// Proved means no errors and nothing left open.
    pub fn proved(&self) -> bool {
        !self.has_errors() && self.remaining_goals.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TacticOutcome {
    /// Tactic advanced the state; the handle is valid for further calls.
    NewState {
        state: StateHandle,
        goal_pretty: String,
    },
    /// Terminal: no goals remain.
    Solved,
    Failed {
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TacticResult {
    pub outcome: TacticOutcome,
    pub elapsed_secs: f64,
}

/// A proof-checker strategy. Implementations are safe to share across
/// threads; sessions themselves are handed out for exclusive use.
pub trait Verifier: Send + Sync {
    fn name(&self) -> &'static str;

    /// Open (or reuse) an environment with `header` loaded exactly once per
    /// distinct header fingerprint.
    fn open_session(&self, header: &str) -> Result<VerifierSession, VerifierError>;

    /// Check a whole source text, returning all diagnostics and all
    /// placeholder goals with pretty-printed states. A timeout yields a
    /// result carrying a synthetic timeout error diagnostic, not an `Err`.
    fn verify(
        &self,
        session: &VerifierSession,
        source: &str,
        timeout: Duration,
    ) -> Result<VerifyResult, VerifierError>;

    /// Run one tactic against a live proof state. A timeout yields
    /// `Failed("timeout")`; a dead handle is a protocol error.
    fn apply_tactic(
        &self,
        session: &VerifierSession,
        state: &StateHandle,
        tactic: &str,
        timeout: Duration,
    ) -> Result<TacticResult, VerifierError>;
}
