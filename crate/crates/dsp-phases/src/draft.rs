//! Draft phase: prompt the reasoning model, filter thinking tokens, and
//! parse the answer into numbered key-formula steps.

use std::sync::OnceLock;

use regex::Regex;

use dsp_core::{Draft, DraftFormat, DraftStep, FormalStatement, PhaseConfig, TokenUsage};
use dsp_gateway::{
    approx_tokens, render_draft_prompt, strip_thinking_with, ModelBackend, ModelEndpoint,
    ThinkingMarkers,
};

use crate::PhaseError;

/// Step-heading line: `### Step 3:`, `**Step 3:**`, or bare `Step 3:`,
/// optionally with the body starting on the same line. The two reasoning
/// models the templates target emit different variants.
fn heading_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^[ \t]*(?:#{1,6}[ \t]*)?(?:\*\*)?[ \t]*Step[ \t]+(\d+)[ \t]*:?[ \t]*(?:\*\*)?[ \t]*:?[ \t]*(.*)$")
            .expect("heading regex")
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedSteps {
    pub steps: Vec<DraftStep>,
    /// No step headings at all; the whole text became one step.
    pub non_conforming: bool,
    /// Headings were out of numeric order and were renumbered in document
    /// order.
    pub reordered: bool,
}

/// Strip a single wrapping math delimiter pair (`\[ .. \]` or `\( .. \)`)
/// when it spans the whole body.
fn strip_math_delimiters(body: &str) -> String {
    let trimmed = body.trim();
    for (open, close) in [("\\[", "\\]"), ("\\(", "\\)")] {
        if let Some(inner) = trimmed
            .strip_prefix(open)
            .and_then(|rest| rest.strip_suffix(close))
        {
            // Only when it is one delimited region, not several.
            if !inner.contains(close) {
                return inner.trim().to_string();
            }
        }
    }
    trimmed.to_string()
}

/// Split draft text on step headings. Bodies are the text between
/// consecutive headings; preamble before the first heading is discarded;
/// steps are renumbered 1..n in document order.
pub fn parse_draft_steps(text: &str) -> ParsedSteps {
    if text.trim().is_empty() {
        return ParsedSteps {
            steps: Vec::new(),
            non_conforming: true,
            reordered: false,
        };
    }
    let mut raw_steps: Vec<(u32, Vec<String>)> = Vec::new();
    for line in text.lines() {
        if let Some(caps) = heading_regex().captures(line) {
            let number: u32 = caps[1].parse().unwrap_or(0);
            let mut body = Vec::new();
            let trailing = caps.get(2).map(|m| m.as_str().trim()).unwrap_or("");
            if !trailing.is_empty() {
                body.push(trailing.to_string());
            }
            raw_steps.push((number, body));
        } else if let Some((_, body)) = raw_steps.last_mut() {
            body.push(line.to_string());
        }
        // else: preamble before the first heading, discarded
    }

    if raw_steps.is_empty() {
        return ParsedSteps {
            steps: vec![DraftStep {
                index: 1,
                body: text.trim().to_string(),
            }],
            non_conforming: true,
            reordered: false,
        };
    }

    let reordered = !raw_steps
        .iter()
        .enumerate()
        .all(|(i, (n, _))| *n == i as u32 + 1);
    let steps = raw_steps
        .into_iter()
        .enumerate()
        .map(|(i, (_, body))| DraftStep {
            index: i as u32 + 1,
            body: strip_math_delimiters(body.join("\n").trim_end()),
        })
        .collect();
    ParsedSteps {
        steps,
        non_conforming: false,
        reordered,
    }
}

/// Split a completion's token total into answer and thinking parts: the
/// thinking share is whatever the filtered answer does not account for.
/// The two always sum to the recorded total.
pub fn split_token_usage(total: u64, answer_text: &str) -> (u64, u64) {
    let answer = approx_tokens(answer_text).min(total);
    (answer, total - answer)
}

/// Run the draft phase: complete, strip thinking, parse steps. The answer
/// and thinking token counts are recorded separately.
pub fn run_draft(
    stmt: &FormalStatement,
    config: &PhaseConfig,
    backend: &dyn ModelBackend,
    endpoint: &ModelEndpoint,
    markers: &ThinkingMarkers,
) -> Result<Draft, PhaseError> {
    let model = config
        .draft_model
        .as_deref()
        .ok_or_else(|| PhaseError::InvalidSketch("run_draft without a draft model".into()))?;
    let messages = render_draft_prompt(stmt, config.draft_format, config.use_informal_proof)?;
    let sampling = config.sampling_for(model);
    let completions = backend.complete(endpoint, &messages, &sampling)?;
    let completion = completions.first().ok_or(PhaseError::EmptyDraft)?;

    let answer = strip_thinking_with(&completion.content, markers);
    if answer.trim().is_empty() {
        return Err(PhaseError::EmptyDraft);
    }
    let (answer_tokens, thinking_tokens) = split_token_usage(completion.tokens, &answer);
    let mut tokens = TokenUsage::default();
    tokens.record_chat(model, answer_tokens, thinking_tokens);

    let (steps, non_conforming, reordered) = match config.draft_format {
        DraftFormat::ConciseSteps => {
            let parsed = parse_draft_steps(&answer);
            (parsed.steps, parsed.non_conforming, parsed.reordered)
        }
        // Free-format drafts flow through as a single step.
        _ => (
            vec![DraftStep {
                index: 1,
                body: answer.trim().to_string(),
            }],
            false,
            false,
        ),
    };

    Ok(Draft {
        statement_id: stmt.id.clone(),
        steps,
        raw_answer: answer,
        format: config.draft_format,
        tokens,
        non_conforming,
        reordered,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_headings_give_two_steps_in_order() {
        let parsed = parse_draft_steps("### Step 1: \nfirst\n### Step 2: \nsecond\n");
        assert_eq!(parsed.steps.len(), 2);
        assert_eq!(parsed.steps[0].body, "first");
        assert_eq!(parsed.steps[1].body, "second");
        assert!(!parsed.non_conforming && !parsed.reordered);
    }

    #[test]
    fn bold_heading_variant_parses() {
        let parsed = parse_draft_steps("**Step 1:**\n\\( f(1) = 1 \\)");
        assert_eq!(parsed.steps.len(), 1);
        assert_eq!(parsed.steps[0].body, "f(1) = 1");
    }

    #[test]
    fn single_heading_with_display_math_strips_delimiters() {
        let parsed = parse_draft_steps("### Step 1: \n\\[ x + y + xy = 80 \\]");
        assert_eq!(parsed.steps.len(), 1);
        assert_eq!(parsed.steps[0].body, "x + y + xy = 80");
    }

    #[test]
    fn multi_formula_body_keeps_inner_delimiters() {
        let parsed = parse_draft_steps("Step 1:\n\\[ a \\]\n\\[ b \\]");
        assert_eq!(parsed.steps[0].body, "\\[ a \\]\n\\[ b \\]");
    }

    #[test]
    fn no_headings_falls_back_to_single_step() {
        let parsed = parse_draft_steps("To prove this, use induction on n.");
        assert!(parsed.non_conforming);
        assert_eq!(parsed.steps.len(), 1);
        assert_eq!(parsed.steps[0].body, "To prove this, use induction on n.");
    }

    #[test]
    fn out_of_order_headings_are_renumbered_in_document_order() {
        let parsed = parse_draft_steps("Step 2:\nbeta\nStep 1:\nalpha\n");
        assert!(parsed.reordered);
        assert_eq!(parsed.steps[0].index, 1);
        assert_eq!(parsed.steps[0].body, "beta");
        assert_eq!(parsed.steps[1].index, 2);
        assert_eq!(parsed.steps[1].body, "alpha");
    }

    #[test]
    fn preamble_before_first_heading_is_discarded() {
        let parsed = parse_draft_steps("Let me think about this.\n### Step 1: \nx = 1\n");
        assert_eq!(parsed.steps.len(), 1);
        assert_eq!(parsed.steps[0].body, "x = 1");
    }

    #[test]
    fn token_split_sums_to_total() {
        let (answer, thinking) = split_token_usage(100, "abcd".repeat(10).as_str());
        assert_eq!(answer, 10);
        assert_eq!(thinking, 90);
        // Answer estimate larger than the total clamps.
        let (answer, thinking) = split_token_usage(3, "abcd".repeat(10).as_str());
        assert_eq!((answer, thinking), (3, 0));
    }

    proptest! {
        /// Fuzz heading permutations: whatever order the model numbers its
        /// steps, we keep document order and renumber 1..n.
        #[test]
        fn renumbering_rule(perm in proptest::sample::subsequence((1u32..=9).collect::<Vec<_>>(), 1..9).prop_shuffle()) {
            let mut text = String::new();
            for n in &perm {
                text.push_str(&format!("### Step {n}: \nbody of original {n}\n"));
            }
            let parsed = parse_draft_steps(&text);
            prop_assert_eq!(parsed.steps.len(), perm.len());
            for (i, step) in parsed.steps.iter().enumerate() {
                prop_assert_eq!(step.index, i as u32 + 1);
                let expected = format!("body of original {}", perm[i]);
                prop_assert_eq!(step.body.as_str(), expected.as_str());
            }
            let in_order = perm.iter().enumerate().all(|(i, n)| *n == i as u32 + 1);
            prop_assert_eq!(parsed.reordered, !in_order);
        }

        /// No non-heading characters of the body region are lost: joining
        /// parsed bodies recovers every body line.
        #[test]
        fn bodies_lose_nothing(bodies in proptest::collection::vec("[a-z0-9 =+]{1,20}", 1..6)) {
            let mut text = String::new();
            for (i, body) in bodies.iter().enumerate() {
                text.push_str(&format!("### Step {}: \n{}\n", i + 1, body));
            }
            let parsed = parse_draft_steps(&text);
            prop_assert_eq!(parsed.steps.len(), bodies.len());
            for (step, body) in parsed.steps.iter().zip(&bodies) {
                prop_assert_eq!(step.body.as_str(), body.trim());
            }
        }

        /// Parsing is deterministic and total on arbitrary text.
        #[test]
        fn total_and_deterministic(text in "(?s).{0,200}") {
            let a = parse_draft_steps(&text);
            let b = parse_draft_steps(&text);
            prop_assert_eq!(a, b);
        }
    }
}
