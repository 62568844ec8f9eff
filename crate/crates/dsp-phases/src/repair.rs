//! Iterative repair: verify the rendered sketch, mask what errored, repeat
//! until clean. Masking is monotone (the active-line set never grows), so
//! the loop terminates within the line count even without the cap; the cap
//! is a safety net that bounds worst-case verifier calls.

use std::time::Duration;

use dsp_core::{Deadline, Diagnostic, Sketch};
use dsp_verifier::{Verifier, VerifierSession, VerifyResult};

use crate::{mask_errors, PhaseError};

#[derive(Debug, Clone)]
pub struct RepairOptions {
    pub iteration_cap: u32,
    pub verify_timeout: Duration,
}

impl Default for RepairOptions {
    fn default() -> Self {
        RepairOptions {
            iteration_cap: 10,
            verify_timeout: Duration::from_secs(300),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairIteration {
    pub errors: usize,
    pub active_before: usize,
    pub active_after: usize,
}

#[derive(Debug, Clone)]
pub struct RepairReport {
    /// Clean verification of the final rendered sketch; its remaining goals
    /// are the holes' proof states.
    pub final_verify: VerifyResult,
    pub iterations: Vec<RepairIteration>,
}

/// Run the verify-mask loop to a clean fixed point. Records
/// `repair_iterations` (number of masking passes) and the translation rate
/// on the sketch. Hole goals are filled from the final verification.
pub fn repair_loop(
    sketch: &mut Sketch,
    verifier: &dyn Verifier,
    session: &VerifierSession,
    deadline: Deadline,
    options: &RepairOptions,
) -> Result<RepairReport, PhaseError> {
    let original_countable = sketch.countable_lines();
    let mut iterations = Vec::new();

    for pass in 0..=options.iteration_cap {
        if deadline.expired() {
            return Err(PhaseError::DeadlineExceeded);
        }
        let (source, line_map) = sketch.render_with_line_map();
        let result = verifier.verify(session, &source, deadline.cap(options.verify_timeout))?;
        if deadline.expired() {
            return Err(PhaseError::DeadlineExceeded);
        }

        let errors: Vec<Diagnostic> = result
            .error_diagnostics()
            .map(|d| {
                let mut mapped = d.clone();
                mapped.line = line_map.get(d.line.wrapping_sub(1)).copied().unwrap_or(0);
                mapped.end_line = None;
                mapped
            })
            .collect();

        if errors.is_empty() {
            sketch.repair_iterations = pass;
            sketch.translation_rate = if original_countable == 0 {
                1.0
            } else {
                sketch.active_countable_lines() as f64 / original_countable as f64
            };
            for goal in &result.remaining_goals {
                if let Some(&line_index) = line_map.get(goal.line.wrapping_sub(1)) {
                    if let Some(hole) =
                        sketch.holes.iter_mut().find(|h| h.line_index == line_index)
                    {
                        hole.goal_pretty = Some(goal.goal_pretty.clone());
                    }
                }
            }
            return Ok(RepairReport {
                final_verify: result,
                iterations,
            });
        }

        if pass == options.iteration_cap {
            return Err(PhaseError::RepairCapExceeded {
                cap: options.iteration_cap,
            });
        }

        let active_before = sketch.active_countable_lines();
        let outcome = mask_errors(sketch, &errors)?;
        if !outcome.changed {
            return Err(PhaseError::RepairStuck);
        }
        iterations.push(RepairIteration {
            errors: errors.len(),
            active_before,
            active_after: sketch.active_countable_lines(),
        });
    }
    unreachable!("loop returns or errors at the cap");
}

/// Fraction of countable lines (everything but headers, comments, and
/// blanks) that survived repair. 1.0 when there is nothing to count.
pub fn translation_rate(original: &Sketch, repaired: &Sketch) -> f64 {
    let denominator = original.countable_lines();
    if denominator == 0 {
        return 1.0;
    }
    repaired.active_countable_lines() as f64 / denominator as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_sketch, rewrite_placeholders};
    use dsp_verifier::{MockFixture, MockRule, MockVerifier, VerifyDelay};

    fn verifier_with_rules(rules: Vec<MockRule>) -> MockVerifier {
        MockVerifier::new(MockFixture {
            error_rules: rules,
            states: Vec::new(),
            verify_delays: Vec::new(),
            fail_headers: Vec::new(),
            detect_empty_blocks: false,
        })
    }

    fn rule(pattern: &str) -> MockRule {
        MockRule {
            pattern: pattern.into(),
            message: format!("scripted: {pattern}"),
            when_absent: None,
        }
    }

    const SKETCH: &str = "\
theorem t (x : \u{2115}) : True := by
  have h1 : x = x := by
    exact rfl_mistake
  have h2 : True := by
    prove_with[h1]
  exact h2";

    #[test]
    fn one_bad_proof_line_cleans_in_one_iteration() {
        let verifier = verifier_with_rules(vec![rule("rfl_mistake")]);
        let session = verifier.open_session("import Mathlib").unwrap();
        let mut sketch = rewrite_placeholders(parse_sketch("t", SKETCH));
        let report = repair_loop(
            &mut sketch,
            &verifier,
            &session,
            Deadline::never(),
            &RepairOptions::default(),
        )
        .unwrap();
        assert_eq!(sketch.repair_iterations, 1);
        assert_eq!(report.iterations.len(), 1);
        assert_eq!(
            sketch
                .lines
                .iter()
                .filter(|l| l.status == dsp_core::LineStatus::MaskedSorried)
                .count(),
            1
        );
        // 5 countable lines originally, one masked.
        assert!((sketch.translation_rate - 0.8).abs() < 1e-9);
        // The repaired sketch still has both holes, now with goals.
        assert_eq!(report.final_verify.remaining_goals.len(), 2);
        assert!(sketch.holes.iter().all(|h| h.goal_pretty.is_some()));
    }

    #[test]
    fn clean_sketch_takes_zero_iterations() {
        let verifier = verifier_with_rules(vec![]);
        let session = verifier.open_session("import Mathlib").unwrap();
        let mut sketch = rewrite_placeholders(parse_sketch("t", SKETCH));
        let report = repair_loop(
            &mut sketch,
            &verifier,
            &session,
            Deadline::never(),
            &RepairOptions::default(),
        )
        .unwrap();
        assert_eq!(sketch.repair_iterations, 0);
        assert!(report.iterations.is_empty());
        assert_eq!(sketch.translation_rate, 1.0);
    }

    #[test]
    fn staged_reveal_converges_in_two_iterations() {
        // Masking the first error uncovers the second.
        let verifier = verifier_with_rules(vec![
            rule("rfl_mistake"),
            MockRule {
                pattern: "prove_with_trigger".into(),
                message: "revealed".into(),
                when_absent: Some("rfl_mistake".into()),
                ..rule("prove_with_trigger")
            },
        ]);
        let source = "\
theorem t (x : \u{2115}) : True := by
  have h1 : x = x := by
    exact rfl_mistake
  have h2 : True := by
    exact prove_with_trigger
  exact h2";
        let session = verifier.open_session("import Mathlib").unwrap();
        let mut sketch = rewrite_placeholders(parse_sketch("t", source));
        repair_loop(
            &mut sketch,
            &verifier,
            &session,
            Deadline::never(),
            &RepairOptions::default(),
        )
        .unwrap();
        assert_eq!(sketch.repair_iterations, 2);
    }

    #[test]
    fn header_error_aborts() {
        let verifier = verifier_with_rules(vec![rule("theorem t")]);
        let session = verifier.open_session("import Mathlib").unwrap();
        let mut sketch = rewrite_placeholders(parse_sketch("t", SKETCH));
        let err = repair_loop(
            &mut sketch,
            &verifier,
            &session,
            Deadline::never(),
            &RepairOptions::default(),
        );
        assert!(matches!(err, Err(PhaseError::HeaderDiagnostic { .. })));
    }

    #[test]
    fn deadline_cuts_the_loop() {
        let verifier = MockVerifier::new(MockFixture {
            error_rules: vec![],
            states: vec![],
            verify_delays: vec![VerifyDelay {
                pattern: "theorem".into(),
                delay_ms: 300,
            }],
            fail_headers: vec![],
            detect_empty_blocks: false,
        });
        let session = verifier.open_session("import Mathlib").unwrap();
        let mut sketch = rewrite_placeholders(parse_sketch("t", SKETCH));
        let err = repair_loop(
            &mut sketch,
            &verifier,
            &session,
            Deadline::after(Duration::from_millis(50)),
            &RepairOptions::default(),
        );
        assert!(matches!(err, Err(PhaseError::DeadlineExceeded)));
    }

    #[test]
    fn iteration_count_is_bounded_by_active_lines() {
        // Worst case: every countable line errors, one per pass.
        let verifier = verifier_with_rules(vec![
            rule("exact step_one"),
            MockRule {
                pattern: "exact step_two".into(),
                when_absent: Some("step_one".into()),
                ..rule("exact step_two")
            },
            MockRule {
                pattern: "exact step_three".into(),
                when_absent: Some("step_two".into()),
                ..rule("exact step_three")
            },
        ]);
        let source = "\
theorem t : True := by
  have a : True := by
    exact step_one
  have b : True := by
    exact step_two
  have c : True := by
    exact step_three
  trivial";
        let session = verifier.open_session("import Mathlib").unwrap();
        let mut sketch = rewrite_placeholders(parse_sketch("t", source));
        let countable = sketch.countable_lines() as u32;
        repair_loop(
            &mut sketch,
            &verifier,
            &session,
            Deadline::never(),
            &RepairOptions::default(),
        )
        .unwrap();
        assert!(sketch.repair_iterations <= countable);
        assert_eq!(sketch.repair_iterations, 3);
    }

    #[test]
    fn emptied_blocks_cascade_to_a_clean_fixed_point() {
        // Masking `have a` orphans b (whose only proof line referenced a),
        // and masking b orphans c. With empty-block detection on, the mock
        // reports each newly emptied block and repair converges.
        let verifier = MockVerifier::new(MockFixture {
            error_rules: vec![rule("bad_token")],
            states: Vec::new(),
            verify_delays: Vec::new(),
            fail_headers: Vec::new(),
            detect_empty_blocks: true,
        });
        let source = "\
theorem t : True := by
  have a : True := bad_token
  have b : True := by
    exact a
  have c : True := by
    exact b
  trivial";
        let session = verifier.open_session("import Mathlib").unwrap();
        let mut sketch = rewrite_placeholders(parse_sketch("t", source));
        let report = repair_loop(
            &mut sketch,
            &verifier,
            &session,
            Deadline::never(),
            &RepairOptions::default(),
        )
        .unwrap();
        assert_eq!(sketch.repair_iterations, 3);
        // Monotone: the active set never grows between iterations.
        for window in report.iterations.windows(1) {
            assert!(window[0].active_after <= window[0].active_before);
        }
        let rendered = sketch.render();
        assert!(rendered.contains("-- have a"));
        assert!(rendered.contains("-- have b"));
        assert!(rendered.contains("-- have c"));
        assert!(rendered.ends_with("  trivial\n"));
        // 6 countable lines, 1 survivor.
        assert!((sketch.translation_rate - 1.0 / 6.0).abs() < 1e-9);
    }

    #[test]
    fn translation_rate_arithmetic() {
        let mut sketch = parse_sketch("t", SKETCH);
        let original = sketch.clone();
        assert_eq!(translation_rate(&original, &sketch), 1.0);
        // 5 countable lines; comment one.
        sketch.lines[2].status = dsp_core::LineStatus::MaskedCommented;
        assert!((translation_rate(&original, &sketch) - 0.8).abs() < 1e-9);

        let empty_original = parse_sketch("e", "");
        let empty_repaired = parse_sketch("e", "");
        assert_eq!(translation_rate(&empty_original, &empty_repaired), 1.0);
    }
}
