use std::collections::BTreeMap;

use dsp_core::{Deadline, LineKind, LineStatus, Sketch};
use dsp_verifier::{Verifier, VerifierSession, VerifyResult};

use crate::{SearchError, SubgoalResult};

#[derive(Debug, Clone, PartialEq)]
pub struct AssembledProof {
    pub proof_text: String,
    /// All holes proved, no commented-out subgoal declarations remain, and
    /// the full proof re-verified clean.
    pub proved: bool,
    /// All holes were proved but the final verification still failed.
    pub splice_mismatch: bool,
    pub final_verify: Option<VerifyResult>,
}

/// Splice each proved hole's tactic sequence at its placeholder site and
/// re-verify the whole proof. Proved is never assumed from the per-subgoal
/// results alone — the assembled text must check clean.
pub fn assemble_proof(
    sketch: &Sketch,
    results: &[SubgoalResult],
    verifier: &dyn Verifier,
    session: &VerifierSession,
    deadline: Deadline,
    verify_timeout: std::time::Duration,
) -> Result<AssembledProof, SearchError> {
    let mut proofs: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    let mut all_proved = true;
    for hole in &sketch.holes {
        let result = results
            .iter()
            .find(|r| r.hole_id == hole.hole_id)
            .ok_or(SearchError::MissingHoleResult(hole.hole_id))?;
        match result.proved_tactics() {
            Some(tactics) => {
                proofs.insert(hole.line_index, tactics.to_vec());
            }
            None => all_proved = false,
        }
    }

    let proof_text = sketch.render_with_proofs(&proofs);
    let commented_subgoals = sketch
        .lines
        .iter()
        .any(|l| l.kind == LineKind::SubgoalDecl && l.status == LineStatus::MaskedCommented);

    if !all_proved || commented_subgoals {
        return Ok(AssembledProof {
            proof_text,
            proved: false,
            splice_mismatch: false,
            final_verify: None,
        });
    }

    let final_verify = verifier.verify(session, &proof_text, deadline.cap(verify_timeout))?;
    let clean = final_verify.proved();
    Ok(AssembledProof {
        proof_text,
        proved: clean,
        splice_mismatch: !clean,
        final_verify: Some(final_verify),
    })
}
