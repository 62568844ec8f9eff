use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

/// Classification of one physical sketch line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineKind {
    /// Import/open preamble or the theorem statement itself.
    TheoremHeader,
    /// `have`/`let`/`suffices`/`obtain` binding a name.
    SubgoalDecl,
    /// Ordinary tactic line.
    ProofStep,
    /// `constructor`, `cases`, `intro`, focus dots, match arms.
    Structural,
    /// `prove_with[...]` or `sorry`.
    Placeholder,
    Comment,
    Blank,
}

/// Masking status of a sketch line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineStatus {
    Active,
    /// Renders with a leading `--` marker.
    MaskedCommented,
    /// Renders as the placeholder tactic at the original indent.
    MaskedSorried,
}

/// One physical line of a formal sketch, classified and annotated with the
/// identifiers it introduces and references.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SketchLine {
    /// 1-based position in the sketch.
    pub index: usize,
    /// Original text, indentation included, no trailing newline.
    pub text: String,
    /// Leading whitespace width in columns.
    pub indent: usize,
    pub kind: LineKind,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub introduces: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub references: BTreeSet<String>,
    pub status: LineStatus,
    /// For placeholder lines: the ordered `prove_with` hint list.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hints: Vec<String>,
}

impl SketchLine {
    pub fn is_active(&self) -> bool {
        self.status == LineStatus::Active
    }

    /// Lines that count toward the translation rate: everything except
    /// headers, comments, and blanks.
    pub fn is_countable(&self) -> bool {
        !matches!(
            self.kind,
            LineKind::TheoremHeader | LineKind::Comment | LineKind::Blank
        )
    }

    /// Whether this line renders as the placeholder tactic.
    pub fn renders_as_placeholder(&self) -> bool {
        match self.status {
            LineStatus::MaskedSorried => true,
            LineStatus::Active => self.kind == LineKind::Placeholder,
            LineStatus::MaskedCommented => false,
        }
    }
}

/// How a subgoal hole is attacked by the proving phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Prune the context to the hinted hypotheses first (`clear * - ...`).
    HintedOnly,
    AllHypotheses,
}

/// A deferred-proof site: where it sits, which hypotheses the sketch model
/// hinted, and the strategies the search will try in order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgoalHole {
    /// 1-based ordinal in line order.
    pub hole_id: u32,
    /// 1-based sketch line of the placeholder.
    pub line_index: usize,
    pub hinted_hypotheses: Vec<String>,
    /// Pretty-printed goal, filled after verification.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal_pretty: Option<String>,
    pub strategies: Vec<Strategy>,
}

impl SubgoalHole {
    pub fn strategies_for_hints(hints: &[String]) -> Vec<Strategy> {
        if hints.is_empty() {
            vec![Strategy::AllHypotheses]
        } else {
            vec![Strategy::HintedOnly, Strategy::AllHypotheses]
        }
    }
}

/// A parsed formal sketch: classified lines, the holes awaiting proofs, and
/// repair bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sketch {
    pub statement_id: String,
    pub lines: Vec<SketchLine>,
    pub holes: Vec<SubgoalHole>,
    pub repair_iterations: u32,
    /// Fraction of countable lines still active after repair.
    pub translation_rate: f64,
}

impl Sketch {
    /// Countable lines regardless of status (the translation-rate denominator).
    pub fn countable_lines(&self) -> usize {
        self.lines.iter().filter(|l| l.is_countable()).count()
    }

    /// Countable lines still active (the translation-rate numerator).
    pub fn active_countable_lines(&self) -> usize {
        self.lines
            .iter()
            .filter(|l| l.is_countable() && l.is_active())
            .count()
    }

    /// 1-based indices of all active lines.
    pub fn active_line_indices(&self) -> BTreeSet<usize> {
        self.lines
            .iter()
            .filter(|l| l.is_active())
            .map(|l| l.index)
            .collect()
    }

    /// Index (1-based) of the block owner of `line_index`: the nearest
    /// preceding non-blank, non-comment line with strictly smaller indent.
    pub fn block_owner(&self, line_index: usize) -> Option<usize> {
        let line = &self.lines[line_index - 1];
        self.lines[..line_index - 1]
            .iter()
            .rev()
            .find(|p| {
                !matches!(p.kind, LineKind::Blank | LineKind::Comment) && p.indent < line.indent
            })
            .map(|p| p.index)
    }

    /// Render the sketch in the form handed to the verifier.
    pub fn render(&self) -> String {
        self.render_with_line_map().0
    }

    /// Render and return the mapping from rendered line number (1-based) to
    /// original sketch line index (1-based).
    ///
    /// Active lines render verbatim. Commented lines render as
    /// `<indent>-- <text>`. Lines rendering as the placeholder tactic
    /// collapse: a run of consecutive placeholder-rendering lines sharing a
    /// block owner emits a single `sorry` mapped to the run's first line.
    pub fn render_with_line_map(&self) -> (String, Vec<usize>) {
        let mut out = String::new();
        let mut map = Vec::new();
        let mut idx = 0usize;
        while idx < self.lines.len() {
            let line = &self.lines[idx];
            match line.status {
                LineStatus::Active if line.kind != LineKind::Placeholder => {
                    out.push_str(&line.text);
                    out.push('\n');
                    map.push(line.index);
                    idx += 1;
                }
                LineStatus::MaskedCommented => {
                    out.push_str(&" ".repeat(line.indent));
                    out.push_str("-- ");
                    out.push_str(line.text.trim_start());
                    out.push('\n');
                    map.push(line.index);
                    idx += 1;
                }
                // Placeholder-rendering run: active placeholder or sorried.
                _ => {
                    let owner = self.block_owner(line.index);
                    let start = idx;
                    let mut end = idx + 1;
                    while end < self.lines.len() {
                        let next = &self.lines[end];
                        if next.renders_as_placeholder() && self.block_owner(next.index) == owner {
                            end += 1;
                        } else {
                            break;
                        }
                    }
                    let first = &self.lines[start];
                    out.push_str(&" ".repeat(first.indent));
                    out.push_str("sorry\n");
                    map.push(first.index);
                    idx = end;
                }
            }
        }
        (out, map)
    }

    /// Render with placeholder sites replaced by found proofs.
    ///
    /// `proofs` maps a hole's `line_index` to its tactic lines; each tactic
    /// is emitted at the placeholder's indentation. Sites without an entry
    /// keep the placeholder. Active lines are never reordered or edited.
    pub fn render_with_proofs(
        &self,
        proofs: &std::collections::BTreeMap<usize, Vec<String>>,
    ) -> String {
        let (_, map) = self.render_with_line_map();
        let mut out = String::new();
        for &line_index in &map {
            let line = &self.lines[line_index - 1];
            if line.renders_as_placeholder() {
                let indent = " ".repeat(line.indent);
                match proofs.get(&line_index) {
                    Some(tactics) if !tactics.is_empty() => {
                        for tactic in tactics {
                            out.push_str(&indent);
                            out.push_str(tactic.trim_end());
                            out.push('\n');
                        }
                    }
                    _ => {
                        out.push_str(&indent);
                        out.push_str("sorry\n");
                    }
                }
            } else if line.status == LineStatus::MaskedCommented {
                out.push_str(&" ".repeat(line.indent));
                out.push_str("-- ");
                out.push_str(line.text.trim_start());
                out.push('\n');
            } else {
                out.push_str(&line.text);
                out.push('\n');
            }
        }
        out
    }

    /// Recompute the hole list from current line statuses.
    ///
    /// Every rendered placeholder site becomes one hole, in line order:
    /// active `prove_with`/`sorry` lines keep their hint lists, collapsed
    /// masked runs get an empty hint list. Holes whose placeholder was
    /// commented out disappear.
    pub fn refresh_holes(&mut self) {
        let (_, map) = self.render_with_line_map();
        let mut holes = Vec::new();
        for &line_index in &map {
            let line = &self.lines[line_index - 1];
            if !line.renders_as_placeholder() {
                continue;
            }
            let hints = if line.is_active() { line.hints.clone() } else { Vec::new() };
            let strategies = SubgoalHole::strategies_for_hints(&hints);
            let previous_goal = self
                .holes
                .iter()
                .find(|h| h.line_index == line_index)
                .and_then(|h| h.goal_pretty.clone());
            holes.push(SubgoalHole {
                hole_id: holes.len() as u32 + 1,
                line_index,
                hinted_hypotheses: hints,
                goal_pretty: previous_goal,
                strategies,
            });
        }
        self.holes = holes;
    }
}
