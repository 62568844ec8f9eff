//! Deterministic scripted checker for offline tests.
//!
//! Behavior comes entirely from a fixture table: error rules decide which
//! source lines are diagnosed, state records decide how tactics resolve.
//! Identical inputs give identical outcomes across runs and processes.

use std::collections::HashMap;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use dsp_core::Diagnostic;

use crate::pool::{header_fingerprint, HeaderPool};
use crate::types::{
    RemainingGoal, StateHandle, TacticOutcome, TacticResult, Verifier, VerifierSession,
    VerifyResult,
};
use crate::VerifierError;

/// Scripted diagnostic: any active line containing `pattern` raises an
/// error, unless `when_absent` still occurs somewhere in the active source.
/// The guard is what lets fixtures stage errors that only appear after an
/// earlier line has been masked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockRule {
    pub pattern: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub when_absent: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockTransition {
    pub tactic: String,
    /// `solved`, `next`, or `failed`.
    pub outcome: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub next: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default)]
    pub delay_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockState {
    pub state_id: String,
    pub goal_pretty: String,
    #[serde(default)]
    pub transitions: Vec<MockTransition>,
}

/// Scripted wall-clock cost for verify calls whose source contains
/// `pattern`. Costs above the caller's timeout produce the synthetic
/// timeout diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyDelay {
    pub pattern: String,
    pub delay_ms: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MockFixture {
    #[serde(default)]
    pub error_rules: Vec<MockRule>,
    #[serde(default)]
    pub states: Vec<MockState>,
    #[serde(default)]
    pub verify_delays: Vec<VerifyDelay>,
    /// Headers whose session open fails with `verifier unavailable`.
    #[serde(default)]
    pub fail_headers: Vec<String>,
    /// When set, a non-header line ending in `by` whose block contains no
    /// code raises an error, the way a checker rejects an empty tactic
    /// block. Lets fixtures exercise repair cascades without staging every
    /// follow-up diagnostic by hand.
    #[serde(default)]
    pub detect_empty_blocks: bool,
}

impl MockFixture {
    pub fn from_path(path: &Path) -> Result<Self, VerifierError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| VerifierError::Fixture(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| VerifierError::Fixture(format!("{}: {e}", path.display())))
    }
}

pub struct MockVerifier {
    fixture: MockFixture,
    states: HashMap<String, MockState>,
    goal_index: HashMap<String, String>,
    pool: HeaderPool,
    next_env: AtomicU64,
    next_session: AtomicU64,
}

impl MockVerifier {
    pub fn new(fixture: MockFixture) -> Self {
        let mut states = HashMap::new();
        let mut goal_index = HashMap::new();
        for state in &fixture.states {
            goal_index
                .entry(state.goal_pretty.clone())
                .or_insert_with(|| state.state_id.clone());
            states.insert(state.state_id.clone(), state.clone());
        }
        MockVerifier {
            fixture,
            states,
            goal_index,
            pool: HeaderPool::new(),
            next_env: AtomicU64::new(1),
            next_session: AtomicU64::new(1),
        }
    }

    pub fn from_path(path: &Path) -> Result<Self, VerifierError> {
        Ok(Self::new(MockFixture::from_path(path)?))
    }

    /// How many header environments were actually loaded.
    pub fn header_loads(&self) -> u64 {
        self.pool.header_loads()
    }

    fn scripted_delay(&self, source: &str) -> u64 {
        self.fixture
            .verify_delays
            .iter()
            .find(|d| source.contains(&d.pattern))
            .map(|d| d.delay_ms)
            .unwrap_or(0)
    }
}

fn is_comment(trimmed: &str) -> bool {
    trimmed.starts_with("--")
}

fn indent_of(line: &str) -> usize {
    line.len() - line.trim_start().len()
}

/// Goal text of a declaration line: everything after the first top-level
/// colon, with any trailing `:= by` / `:=` / `by` removed. Colons inside
/// brackets (binder groups, type ascriptions) are not top-level.
pub(crate) fn goal_of_decl(text: &str) -> String {
    let mut s = text.trim().to_string();
    if let Some(stripped) = s.strip_suffix("by") {
        s = stripped.trim_end().to_string();
    }
    if let Some(stripped) = s.strip_suffix(":=") {
        s = stripped.trim_end().to_string();
    }
    let mut depth = 0i32;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' | '[' | '{' | '\u{27e8}' => depth += 1,
            ')' | ']' | '}' | '\u{27e9}' => depth -= 1,
            ':' if depth == 0 => {
                // Skip `:=` (defeq), take only a plain type-ascription colon.
                if s[i + ch.len_utf8()..].starts_with('=') {
                    continue;
                }
                return s[i + ch.len_utf8()..].trim().to_string();
            }
            _ => {}
        }
    }
    s
}

impl Verifier for MockVerifier {
    fn name(&self) -> &'static str {
        "mock"
    }

    fn open_session(&self, header: &str) -> Result<VerifierSession, VerifierError> {
        if self.fixture.fail_headers.iter().any(|h| h == header) {
            return Err(VerifierError::Unavailable(format!(
                "scripted start failure for header `{header}`"
            )));
        }
        let fingerprint = header_fingerprint(header);
        let environment_handle = self
            .pool
            .env_for(&fingerprint, || Ok(self.next_env.fetch_add(1, Ordering::SeqCst)))?;
        Ok(VerifierSession {
            session_id: self.next_session.fetch_add(1, Ordering::SeqCst),
            environment_handle,
            header_fingerprint: fingerprint,
        })
    }

    fn verify(
        &self,
        _session: &VerifierSession,
        source: &str,
        timeout: Duration,
    ) -> Result<VerifyResult, VerifierError> {
        let delay = Duration::from_millis(self.scripted_delay(source));
        if delay > timeout {
            std::thread::sleep(timeout);
            return Ok(VerifyResult {
                diagnostics: vec![Diagnostic::error(1, 0, "verification timed out")],
                remaining_goals: Vec::new(),
                elapsed_secs: timeout.as_secs_f64(),
            });
        }
        if !delay.is_zero() {
            std::thread::sleep(delay);
        }

        if source.trim().is_empty() {
            return Ok(VerifyResult {
                diagnostics: vec![Diagnostic::error(1, 0, "no theorem found in source")],
                remaining_goals: Vec::new(),
                elapsed_secs: delay.as_secs_f64(),
            });
        }

        let lines: Vec<&str> = source.lines().collect();
        let active_source: String = lines
            .iter()
            .filter(|l| !is_comment(l.trim()))
            .copied()
            .collect::<Vec<_>>()
            .join("\n");

        let mut diagnostics = Vec::new();
        let mut remaining_goals = Vec::new();
        for (i, raw) in lines.iter().enumerate() {
            let line_no = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || is_comment(trimmed) {
                continue;
            }
            for rule in &self.fixture.error_rules {
                let suppressed = rule
                    .when_absent
                    .as_ref()
                    .is_some_and(|guard| active_source.contains(guard.as_str()));
                if trimmed.contains(&rule.pattern) && !suppressed {
                    diagnostics.push(Diagnostic::error(line_no, indent_of(raw), &rule.message));
                }
            }
            if self.fixture.detect_empty_blocks && trimmed.ends_with("by") {
                let empty = !lines[i + 1..]
                    .iter()
                    .take_while(|l| {
                        l.trim().is_empty() || is_comment(l.trim()) || indent_of(l) > indent_of(raw)
                    })
                    .any(|l| !l.trim().is_empty() && !is_comment(l.trim()));
                if empty {
                    diagnostics.push(Diagnostic::error(
                        line_no,
                        indent_of(raw),
                        "tactic block has no tactics",
                    ));
                }
            }
            if trimmed == "sorry" {
                let goal = lines[..i]
                    .iter()
                    .rev()
                    .find(|p| {
                        let pt = p.trim();
                        !pt.is_empty() && !is_comment(pt) && indent_of(p) < indent_of(raw)
                    })
                    .map(|decl| goal_of_decl(decl))
                    .unwrap_or_else(|| "?".to_string());
                let state_id = self
                    .goal_index
                    .get(&goal)
                    .cloned()
                    .unwrap_or_else(|| format!("goal:{goal}"));
                remaining_goals.push(RemainingGoal {
                    goal_id: StateHandle(state_id),
                    goal_pretty: goal,
                    line: line_no,
                    column: indent_of(raw),
                });
            }
        }

        Ok(VerifyResult {
            diagnostics,
            remaining_goals,
            elapsed_secs: delay.as_secs_f64(),
        })
    }

    fn apply_tactic(
        &self,
        _session: &VerifierSession,
        state: &StateHandle,
        tactic: &str,
        timeout: Duration,
    ) -> Result<TacticResult, VerifierError> {
        let Some(record) = self.states.get(&state.0) else {
            // Synthesized goal handles are live but have no transitions.
            if state.0.starts_with("goal:") {
                return Ok(TacticResult {
                    outcome: TacticOutcome::Failed {
                        message: format!("no transition for tactic `{}`", tactic.trim()),
                    },
                    elapsed_secs: 0.0,
                });
            }
            return Err(VerifierError::Protocol(format!(
                "dead state handle `{}`",
                state.0
            )));
        };
        let Some(transition) = record
            .transitions
            .iter()
            .find(|t| t.tactic == tactic.trim())
        else {
            return Ok(TacticResult {
                outcome: TacticOutcome::Failed {
                    message: format!("no transition for tactic `{}`", tactic.trim()),
                },
                elapsed_secs: 0.0,
            });
        };

        let delay = Duration::from_millis(transition.delay_ms);
        if delay > timeout {
            std::thread::sleep(timeout);
            return Ok(TacticResult {
                outcome: TacticOutcome::Failed {
                    message: "timeout".into(),
                },
                elapsed_secs: timeout.as_secs_f64(),
            });
        }
        if !delay.is_zero() {
            std::thread::sleep(delay);
        }
        let elapsed_secs = delay.as_secs_f64();

        let outcome = match transition.outcome.as_str() {
            "solved" => TacticOutcome::Solved,
            "next" => {
                let next_id = transition.next.as_ref().ok_or_else(|| {
                    VerifierError::Fixture(format!(
                        "state `{}` transition `{}` lacks a next state",
                        record.state_id, transition.tactic
                    ))
                })?;
                let next = self.states.get(next_id).ok_or_else(|| {
                    VerifierError::Fixture(format!("unknown next state `{next_id}`"))
                })?;
                TacticOutcome::NewState {
                    state: StateHandle(next.state_id.clone()),
                    goal_pretty: next.goal_pretty.clone(),
                }
            }
            "failed" => TacticOutcome::Failed {
                message: transition
                    .message
                    .clone()
                    .unwrap_or_else(|| "tactic failed".into()),
            },
            other => {
                return Err(VerifierError::Fixture(format!(
                    "unknown transition outcome `{other}`"
                )))
            }
        };
        Ok(TacticResult {
            outcome,
            elapsed_secs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> MockFixture {
        MockFixture {
            error_rules: vec![MockRule {
                pattern: "bad ::=".into(),
                message: "unexpected token".into(),
                when_absent: None,
            }],
            states: vec![
                MockState {
                    state_id: "g_refl".into(),
                    goal_pretty: "x = x".into(),
                    transitions: vec![MockTransition {
                        tactic: "rfl".into(),
                        outcome: "solved".into(),
                        next: None,
                        message: None,
                        delay_ms: 0,
                    }],
                },
                MockState {
                    state_id: "g1".into(),
                    goal_pretty: "y < 1 / 2".into(),
                    transitions: vec![MockTransition {
                        tactic: "linarith".into(),
                        outcome: "next".into(),
                        next: Some("g_refl".into()),
                        message: None,
                        delay_ms: 0,
                    }],
                },
            ],
            verify_delays: Vec::new(),
            fail_headers: vec!["import Broken".into()],
            detect_empty_blocks: false,
        }
    }

    fn verifier() -> MockVerifier {
        MockVerifier::new(fixture())
    }

    #[test]
    fn shared_header_shares_environment() {
        let v = verifier();
        let s1 = v.open_session("import Mathlib").unwrap();
        let s2 = v.open_session("import Mathlib").unwrap();
        let s3 = v.open_session("import Std").unwrap();
        assert_eq!(s1.environment_handle, s2.environment_handle);
        assert_ne!(s1.session_id, s2.session_id);
        assert_ne!(s1.environment_handle, s3.environment_handle);
        assert_eq!(v.header_loads(), 2);
    }

    #[test]
    fn scripted_start_failure() {
        let v = verifier();
        assert!(matches!(
            v.open_session("import Broken"),
            Err(VerifierError::Unavailable(_))
        ));
    }

    #[test]
    fn verify_reports_errors_and_goals() {
        let v = verifier();
        let session = v.open_session("import Mathlib").unwrap();
        let source = "theorem t : True := by\n  have h : bad ::= 1 := by\n    sorry\n  have h2 : x = x := by\n    sorry\n";
        let result = v
            .verify(&session, source, Duration::from_secs(5))
            .unwrap();
        assert_eq!(result.error_diagnostics().count(), 1);
        assert_eq!(result.diagnostics[0].line, 2);
        assert_eq!(result.remaining_goals.len(), 2);
        assert_eq!(result.remaining_goals[1].goal_pretty, "x = x");
        assert_eq!(result.remaining_goals[1].goal_id, StateHandle("g_refl".into()));
    }

    #[test]
    fn commented_lines_are_invisible() {
        let v = verifier();
        let session = v.open_session("import Mathlib").unwrap();
        let source = "theorem t : True := by\n  -- have h : bad ::= 1 := by\n  trivial\n";
        let result = v.verify(&session, source, Duration::from_secs(5)).unwrap();
        assert!(!result.has_errors());
        assert!(result.proved());
    }

    #[test]
    fn empty_source_is_one_error() {
        let v = verifier();
        let session = v.open_session("import Mathlib").unwrap();
        let result = v.verify(&session, "  \n", Duration::from_secs(5)).unwrap();
        assert_eq!(result.error_diagnostics().count(), 1);
    }

    #[test]
    fn when_absent_stages_a_reveal() {
        let mut fx = fixture();
        fx.error_rules.push(MockRule {
            pattern: "second_wave".into(),
            message: "revealed".into(),
            when_absent: Some("first_wave".into()),
        });
        fx.error_rules.push(MockRule {
            pattern: "first_wave".into(),
            message: "initial".into(),
            when_absent: None,
        });
        let v = MockVerifier::new(fx);
        let session = v.open_session("h").unwrap();

        let before = "theorem t : True := by\n  first_wave\n  second_wave\n";
        let result = v.verify(&session, before, Duration::from_secs(5)).unwrap();
        assert_eq!(result.error_diagnostics().count(), 1);
        assert_eq!(result.diagnostics[0].message, "initial");

        let after = "theorem t : True := by\n  -- first_wave\n  second_wave\n";
        let result = v.verify(&session, after, Duration::from_secs(5)).unwrap();
        assert_eq!(result.error_diagnostics().count(), 1);
        assert_eq!(result.diagnostics[0].message, "revealed");
    }

    #[test]
    fn tactics_resolve_from_the_table() {
        let v = verifier();
        let session = v.open_session("h").unwrap();
        let timeout = Duration::from_secs(1);

        let solved = v
            .apply_tactic(&session, &StateHandle("g_refl".into()), "rfl", timeout)
            .unwrap();
        assert_eq!(solved.outcome, TacticOutcome::Solved);

        let stepped = v
            .apply_tactic(&session, &StateHandle("g1".into()), "linarith", timeout)
            .unwrap();
        assert!(matches!(
            stepped.outcome,
            TacticOutcome::NewState { ref state, .. } if state.0 == "g_refl"
        ));

        let failed = v
            .apply_tactic(&session, &StateHandle("g1".into()), "mystery", timeout)
            .unwrap();
        assert!(matches!(failed.outcome, TacticOutcome::Failed { .. }));

        let dead = v.apply_tactic(&session, &StateHandle("nope".into()), "rfl", timeout);
        assert!(matches!(dead, Err(VerifierError::Protocol(_))));
    }

    #[test]
    fn scripted_verify_timeout() {
        let mut fx = fixture();
        fx.verify_delays.push(VerifyDelay {
            pattern: "slow_theorem".into(),
            delay_ms: 200,
        });
        let v = MockVerifier::new(fx);
        let session = v.open_session("h").unwrap();
        let result = v
            .verify(&session, "slow_theorem : True := by", Duration::from_millis(10))
            .unwrap();
        assert!(result.has_errors());
        assert!(result.diagnostics[0].message.contains("timed out"));
    }

    #[test]
    fn goal_extraction_handles_binders_and_ascriptions() {
        assert_eq!(goal_of_decl("have h3 : y < (1:\u{211d}) / 2 := by"), "y < (1:\u{211d}) / 2");
        assert_eq!(
            goal_of_decl("example (x y : \u{211d}) (h1 : x \u{2264} 1 / 2) : y < 1 / 2 := by"),
            "y < 1 / 2"
        );
        assert_eq!(
            goal_of_decl("have h2 : \u{2200} b, f 0 + 2 * f b = f (f b) := by"),
            "\u{2200} b, f 0 + 2 * f b = f (f b)"
        );
    }
}
