//! One-shot prompt templates for the draft and sketch models.

use dsp_core::{Draft, DraftFormat, FormalStatement};

use crate::{ChatMessage, GatewayError};

const DRAFT_FORMAT_BLOCK: &str = concat!(
    " Each step can only contain **one** equation without any explanation.\n",
    "Here is an example:\n",
    "### Step 1: \n",
    "\\[ x + y + xy = 80 \\]\n",
    "...\n",
    "### Step 5: \n",
    "\\[ x + y + xy + 1 = 81 \\]",
);

/// Build the draft-model prompt. `concise_steps` carries the one-equation-
/// per-step instruction and its example; `free_format` drops that block.
/// The informal proof is appended only when the ablation toggle asks for it.
pub fn render_draft_prompt(
    stmt: &FormalStatement,
    format: DraftFormat,
    use_informal_proof: bool,
) -> Result<Vec<ChatMessage>, GatewayError> {
    let mut prompt = format!(
        "formal_statement:\n{}\nPlease provide an extremely detailed mathematical calculation following your thinking.",
        stmt.statement
    );
    match format {
        DraftFormat::ConciseSteps => prompt.push_str(DRAFT_FORMAT_BLOCK),
        DraftFormat::FreeFormat => {}
        DraftFormat::None => {
            return Err(GatewayError::InvalidRequest(
                "draft prompt requested with draft_format = none".into(),
            ))
        }
    }
    if use_informal_proof {
        if let Some(informal) = &stmt.informal_proof {
            prompt.push_str("\ninformal_proof:\n");
            prompt.push_str(informal);
        }
    }
    Ok(vec![ChatMessage::user(prompt)])
}

const SKETCH_INSTRUCTIONS: &str = concat!(
    "Prove the theorem in Lean 4 code. You should translate steps in the informal proof in a series of ",
    "'have'/'let'/'induction'/'match'/'suffices' statements, but you do not need to prove them. ",
    "You only need to use placeholder `by{new_line}prove_with[h1, step5, ...{hypothesises used here which are proposed ahead}]`. ",
    "We want to have as many lemmas as possible, and every lemma must be easy to proof.\n",
    "When using a / b, you must specify **a's or b's type**, because (1:\u{211d}) / 2 is 0.5, but (1:\u{2124}) / 2 is 0.\n",
    "When using a - b, you must specify **a's or b's type**, because (1:\u{2124}) - 2 is -1, but (1:\u{2115}) - 2 is 0.\n",
    "n! is incorrect, you should use (n)!.\n",
    "Here is an example:\n",
);

const SKETCH_ONE_SHOT: &str = concat!(
    "import Mathlib\n",
    "example (x y : \u{211d}) (h1 : x \u{2264} 1 / 2) (h2 : x > 0) (t: y < Real.sin (x)): y < 1 / 2 := by\n",
    "  -- Step 1\n",
    "  have h3 : y < (1:\u{211d}) / 2 := by\n",
    "    -- Step 2\n",
    "    have h4 : Real.sin x \u{2264} x := by\n",
    "      prove_with[h2]\n",
    "    -- Step 3\n",
    "    have h5 : y < x := by\n",
    "      prove_with[h4, t]\n",
    "    prove_with[h1, h5]\n",
    "  exact h3\n",
);

/// Build the sketch-model prompt: the informal proof (when a draft phase
/// ran), the prove_with instruction with its numeric-type cautions, the
/// one-shot example, then header and formal statement.
pub fn render_sketch_prompt(
    stmt: &FormalStatement,
    draft: Option<&Draft>,
) -> Result<Vec<ChatMessage>, GatewayError> {
    let mut prompt = String::new();
    if let Some(draft) = draft {
        if draft.raw_answer.trim().is_empty() && draft.steps.is_empty() {
            return Err(GatewayError::InvalidRequest("empty draft".into()));
        }
        prompt.push_str("informal_proof:\n");
        prompt.push_str(&draft.raw_answer);
        prompt.push('\n');
    }
    prompt.push_str(SKETCH_INSTRUCTIONS);
    prompt.push_str(SKETCH_ONE_SHOT);
    prompt.push_str("formal_statement:\n```lean4\n");
    prompt.push_str(&stmt.header);
    prompt.push('\n');
    prompt.push_str(&stmt.statement);
    prompt.push('\n');
    Ok(vec![ChatMessage::user(prompt)])
}
