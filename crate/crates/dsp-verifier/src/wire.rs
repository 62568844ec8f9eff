//! Wire shapes for the checker subprocess: newline-delimited JSON records
//! over standard streams, one request and one response per line. Field
//! names follow the community REPL convention and are pinned by golden
//! transcript tests.

use serde::{Deserialize, Serialize};

/// A request line. Exactly one of the two forms is populated: a `cmd`
/// (whole-source check, optionally against a preloaded `env`) or a
/// `tactic` applied to a `proofState`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cmd: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub env: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tactic: Option<String>,
    #[serde(rename = "proofState", default, skip_serializing_if = "Option::is_none")]
    pub proof_state: Option<u64>,
}

impl ReplRequest {
    pub fn cmd(source: impl Into<String>, env: Option<u64>) -> Self {
        ReplRequest {
            cmd: Some(source.into()),
            env,
            tactic: None,
            proof_state: None,
        }
    }

    pub fn tactic(tactic: impl Into<String>, proof_state: u64) -> Self {
        ReplRequest {
            cmd: None,
            env: None,
            tactic: Some(tactic.into()),
            proof_state: Some(proof_state),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplPos {
    pub line: u64,
    pub column: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplMessage {
    pub severity: String,
    pub pos: ReplPos,
    #[serde(rename = "endPos", default, skip_serializing_if = "Option::is_none")]
    pub end_pos: Option<ReplPos>,
    pub data: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplSorry {
    pub pos: ReplPos,
    #[serde(rename = "endPos", default, skip_serializing_if = "Option::is_none")]
    pub end_pos: Option<ReplPos>,
    pub goal: String,
    #[serde(rename = "proofState", default, skip_serializing_if = "Option::is_none")]
    pub proof_state: Option<u64>,
}

/// A response line. `env` answers `cmd` requests; `proofState`/`goals`
/// answer tactic requests; `message` carries a whole-request failure.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReplResponse {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub env: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub messages: Vec<ReplMessage>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sorries: Vec<ReplSorry>,
    #[serde(rename = "proofState", default, skip_serializing_if = "Option::is_none")]
    pub proof_state: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goals: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_shapes() {
        let cmd = ReplRequest::cmd("theorem t : True := by sorry", Some(0));
        assert_eq!(
            serde_json::to_string(&cmd).unwrap(),
            r#"{"cmd":"theorem t : True := by sorry","env":0}"#
        );
        let tac = ReplRequest::tactic("rfl", 3);
        assert_eq!(
            serde_json::to_string(&tac).unwrap(),
            r#"{"tactic":"rfl","proofState":3}"#
        );
    }

    #[test]
    fn response_parses_sorries_and_messages() {
        let line = r#"{"env":1,"messages":[{"severity":"error","pos":{"line":4,"column":2},"endPos":{"line":4,"column":10},"data":"unknown identifier"}],"sorries":[{"pos":{"line":6,"column":4},"goal":"⊢ x = x","proofState":0}]}"#;
        let resp: ReplResponse = serde_json::from_str(line).unwrap();
        assert_eq!(resp.env, Some(1));
        assert_eq!(resp.messages[0].pos.line, 4);
        assert_eq!(resp.sorries[0].goal, "⊢ x = x");
        assert_eq!(resp.sorries[0].proof_state, Some(0));
    }
}
