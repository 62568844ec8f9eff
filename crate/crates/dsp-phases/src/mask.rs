//! Error line masking.
//!
//! Rule 1: an ill-formed subgoal (or structural) line is commented out
//! together with its dependency closure. Rule 2: an erroneous proof line
//! inside a subgoal's by-block is replaced by the placeholder tactic along
//! with its subsequent dependents in that block. The dependency closure of
//! a line is every later line that references a name it introduces (within
//! the name's indentation scope), plus everything nested in its block,
//! transitively.

use std::collections::BTreeSet;

use dsp_core::{Diagnostic, LineKind, LineStatus, Sketch};

use crate::PhaseError;

/// What one masking pass changed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MaskOutcome {
    pub changed: bool,
    /// 1-based indices newly commented out.
    pub commented: BTreeSet<usize>,
    /// 1-based indices newly replaced by the placeholder.
    pub sorried: BTreeSet<usize>,
    /// Diagnostics whose line fell outside the sketch.
    pub ignored: usize,
}

fn is_code(sketch: &Sketch, idx: usize) -> bool {
    !matches!(
        sketch.lines[idx - 1].kind,
        LineKind::Blank | LineKind::Comment
    )
}

fn is_maskable(sketch: &Sketch, idx: usize) -> bool {
    is_code(sketch, idx) && sketch.lines[idx - 1].kind != LineKind::TheoremHeader
}

/// Inclusive end of the nested block headed by `idx`: lines following it
/// with strictly greater indent (blanks and comments pass through). Match
/// and cases arms sit at the indent of their head, so `|`-lines at equal
/// indent chain the block onward.
fn block_end(sketch: &Sketch, idx: usize) -> usize {
    let indent = sketch.lines[idx - 1].indent;
    let mut end = idx;
    for line in &sketch.lines[idx..] {
        let is_arm = line.indent == indent && line.text.trim_start().starts_with('|');
        if matches!(line.kind, LineKind::Blank | LineKind::Comment) || line.indent > indent || is_arm
        {
            end = line.index;
        } else {
            break;
        }
    }
    end
}

/// Whether the line heads a nonempty nested block (counting only code).
fn heads_block(sketch: &Sketch, idx: usize) -> bool {
    (idx + 1..=block_end(sketch, idx)).any(|j| is_code(sketch, j))
}

/// Exclusive end of the scope of names introduced at `idx`: the first later
/// code line with strictly smaller indent ends it.
fn scope_end(sketch: &Sketch, idx: usize) -> usize {
    let indent = sketch.lines[idx - 1].indent;
    for line in &sketch.lines[idx..] {
        if is_code(sketch, line.index) && line.indent < indent {
            return line.index;
        }
    }
    sketch.lines.len() + 1
}

/// The nearest preceding line with smaller indent whose code ends in `by`:
/// the owner of the by-block containing `idx`.
fn by_block_owner(sketch: &Sketch, idx: usize) -> Option<usize> {
    let indent = sketch.lines[idx - 1].indent;
    sketch.lines[..idx - 1]
        .iter()
        .rev()
        .filter(|l| is_code(sketch, l.index) && l.indent < indent)
        .find(|l| {
            let code = l.text.trim();
            let code = match code.find(" --") {
                Some(pos) => code[..pos].trim_end(),
                None => code,
            };
            code.ends_with("by")
        })
        .map(|l| l.index)
}

/// Transitive dependency closure of `seed`, optionally restricted to the
/// half-open candidate window `(lo, hi)` of 1-based indices.
fn dependency_closure(
    sketch: &Sketch,
    seed: usize,
    window: Option<(usize, usize)>,
) -> BTreeSet<usize> {
    let in_window = |idx: usize| match window {
        Some((lo, hi)) => idx > lo && idx < hi,
        None => true,
    };
    let mut set = BTreeSet::from([seed]);
    loop {
        let mut added = Vec::new();
        for &idx in &set {
            // Everything nested inside this line's block.
            for j in idx + 1..=block_end(sketch, idx) {
                if !set.contains(&j) && in_window(j) && is_maskable(sketch, j) {
                    added.push(j);
                }
            }
            // Later lines referencing a name introduced here, within the
            // name's scope.
            let line = &sketch.lines[idx - 1];
            if !line.introduces.is_empty() {
                let end = scope_end(sketch, idx);
                for later in &sketch.lines[idx..end - 1] {
                    let j = later.index;
                    if set.contains(&j) || !in_window(j) || !is_maskable(sketch, j) {
                        continue;
                    }
                    if !later.references.is_disjoint(&line.introduces) {
                        added.push(j);
                    }
                }
            }
        }
        if added.is_empty() {
            break;
        }
        set.extend(added);
    }
    set
}

/// Apply the two masking rules for every error diagnostic. Rule dispatch is
/// total over line kinds; a diagnostic on the theorem header is
/// unrepairable and aborts the sketch. Statuses only ever move toward
/// masked, so repeated application is monotone.
pub fn mask_errors(sketch: &mut Sketch, diags: &[Diagnostic]) -> Result<MaskOutcome, PhaseError> {
    let mut outcome = MaskOutcome::default();
    for diag in diags.iter().filter(|d| d.is_error()) {
        if diag.line == 0 || diag.line > sketch.lines.len() {
            tracing::warn!(line = diag.line, "diagnostic outside sketch; ignored");
            outcome.ignored += 1;
            continue;
        }
        let line = &sketch.lines[diag.line - 1];
        if line.status == LineStatus::MaskedCommented {
            continue;
        }
        match line.kind {
            LineKind::TheoremHeader => {
                return Err(PhaseError::HeaderDiagnostic {
                    line: diag.line,
                    message: diag.message.clone(),
                })
            }
            LineKind::Blank | LineKind::Comment => {
                tracing::warn!(line = diag.line, "diagnostic on non-code line; ignored");
                outcome.ignored += 1;
            }
            // Rule 1: the subgoal statement itself is ill-formed. A
            // structural line owning nested content (a cases/match head, an
            // arm, a focus dot) is treated the same way — replacing only the
            // head with a placeholder would orphan its branches.
            kind if kind == LineKind::SubgoalDecl
                || (kind == LineKind::Structural && heads_block(sketch, diag.line)) =>
            {
                for idx in dependency_closure(sketch, diag.line, None) {
                    let target = &mut sketch.lines[idx - 1];
                    if target.status != LineStatus::MaskedCommented {
                        target.status = LineStatus::MaskedCommented;
                        outcome.sorried.remove(&idx);
                        outcome.commented.insert(idx);
                        outcome.changed = true;
                    }
                }
            }
            // Rule 2: a proof line (including a leaf structural tactic like
            // `intro`) raised the error; it and its subsequent dependents
            // within the owning by-block become the placeholder.
            _ => {
                let window = by_block_owner(sketch, diag.line)
                    .map(|owner| (owner, block_end(sketch, owner) + 1));
                for idx in dependency_closure(sketch, diag.line, window) {
                    let target = &mut sketch.lines[idx - 1];
                    if target.status == LineStatus::Active {
                        target.status = LineStatus::MaskedSorried;
                        outcome.sorried.insert(idx);
                        outcome.changed = true;
                    }
                }
            }
        }
    }
    if outcome.changed {
        sketch.refresh_holes();
    }
    Ok(outcome)
}
