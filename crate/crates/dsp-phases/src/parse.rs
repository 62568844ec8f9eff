//! Sketch parsing: line classification, identifier tracking, and
//! placeholder rewriting. Everything is computed textually — indentation
//! defines block nesting and binder scans define the dependency edges the
//! masking rules consume.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use regex::Regex;

use dsp_core::{FormalStatement, LineKind, LineStatus, Sketch, SketchLine};

fn ident_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[\p{L}_][\p{L}\p{N}_']*").expect("ident regex"))
}

fn prove_with_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^prove_with\s*\[([^\]]*)\]$").expect("prove_with regex"))
}

const HEADER_KEYWORDS: &[&str] = &[
    "import", "open", "set_option", "namespace", "section", "universe", "variable", "theorem",
    "example", "lemma",
];

const STRUCTURAL_KEYWORDS: &[&str] = &[
    "constructor",
    "cases",
    "cases'",
    "rcases",
    "induction",
    "induction'",
    "match",
    "intro",
    "intros",
    "by_cases",
];

fn indent_of(line: &str) -> usize {
    line.len() - line.trim_start().len()
}

/// Drop a trailing `-- ...` comment (when preceded by whitespace or at line
/// start) so token scans do not pick names out of comments.
fn strip_trailing_comment(text: &str) -> &str {
    let mut search = 0;
    while let Some(pos) = text[search..].find("--") {
        let abs = search + pos;
        let boundary = abs == 0
            || text[..abs]
                .chars()
                .next_back()
                .is_some_and(char::is_whitespace);
        if boundary {
            return text[..abs].trim_end();
        }
        search = abs + 2;
    }
    text
}

fn first_word(code: &str) -> &str {
    code.split_whitespace().next().unwrap_or("")
}

/// Identifier tokens in `code`.
fn idents(code: &str) -> BTreeSet<String> {
    ident_regex()
        .find_iter(code)
        .map(|m| m.as_str().to_string())
        .collect()
}

/// Names bound by an anonymous-constructor or tuple pattern, e.g.
/// `⟨left, right⟩` or plain `h`.
fn pattern_names(pattern: &str) -> BTreeSet<String> {
    idents(pattern)
}

/// Binder names of a declaration header: for each bracketed group at depth
/// one, the identifiers before the group's first colon.
fn header_binder_names(code: &str) -> BTreeSet<String> {
    let mut names = BTreeSet::new();
    let mut depth = 0i32;
    let mut group = String::new();
    for ch in code.chars() {
        match ch {
            '(' | '{' | '[' | '\u{27e8}' | '\u{2983}' => {
                depth += 1;
                if depth == 1 {
                    group.clear();
                }
            }
            ')' | '}' | ']' | '\u{27e9}' | '\u{2984}' => {
                if depth == 1 {
                    if let Some((binders, _)) = group.split_once(':') {
                        names.extend(idents(binders));
                    }
                }
                depth -= 1;
            }
            _ if depth >= 1 => group.push(ch),
            _ => {}
        }
    }
    names
}

/// Names introduced by a `have`/`let`/`suffices`/`obtain` line: the bound
/// name or destructuring pattern before the type ascription or `:=`.
fn subgoal_intro_names(code: &str) -> BTreeSet<String> {
    let rest = match code.split_once(char::is_whitespace) {
        Some((_, rest)) => rest,
        None => return BTreeSet::new(),
    };
    let mut binder = String::new();
    for (i, ch) in rest.char_indices() {
        if ch == ':' {
            // `:=` with no ascription still ends the binder part.
            binder = rest[..i].to_string();
            break;
        }
        if i == rest.len() - ch.len_utf8() {
            binder = rest.to_string();
        }
    }
    pattern_names(&binder)
}

/// Names introduced by a structural line (`intro a b`, `obtain ... with`,
/// `induction' n with n ih`, `| inl h =>`, `by_cases h : p`).
fn structural_intro_names(code: &str) -> BTreeSet<String> {
    if let Some(arm) = code.strip_prefix('|') {
        // Match arm: first token is the constructor, the rest up to `=>`
        // are bound names.
        let beam = arm.split("=>").next().unwrap_or("");
        let mut tokens = beam.split_whitespace();
        let _constructor = tokens.next();
        return tokens.flat_map(|t| pattern_names(t)).collect();
    }
    let word = first_word(code);
    match word {
        "intro" | "intros" => idents(&code[word.len()..]),
        "by_cases" => {
            let rest = &code[word.len()..];
            match rest.split_once(':') {
                Some((name, _)) => idents(name),
                None => BTreeSet::new(),
            }
        }
        _ => match code.split_once(" with ") {
            Some((_, bound)) => idents(bound),
            None => BTreeSet::new(),
        },
    }
}

fn parse_prove_with(code: &str) -> Option<Vec<String>> {
    let caps = prove_with_regex().captures(code)?;
    let list = caps.get(1).map(|m| m.as_str()).unwrap_or("");
    Some(
        list.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect(),
    )
}

/// Parse sketch source into classified lines with identifier annotations.
/// Classification is total: unknown constructs fall back to proof steps.
pub fn parse_sketch(statement_id: &str, source: &str) -> Sketch {
    let mut lines = Vec::new();
    let mut in_header = true;
    let mut seen_any_code = false;

    for (i, raw) in source.lines().enumerate() {
        let index = i + 1;
        let indent = indent_of(raw);
        let trimmed = raw.trim();
        let code = strip_trailing_comment(trimmed);

        let mut introduces = BTreeSet::new();
        let mut references = BTreeSet::new();
        let mut hints = Vec::new();

        let kind = if trimmed.is_empty() {
            LineKind::Blank
        } else if trimmed.starts_with("--") {
            LineKind::Comment
        } else if in_header {
            if !seen_any_code && !HEADER_KEYWORDS.contains(&first_word(code)) {
                // Bare fragment with no preamble: body from the start.
                in_header = false;
            }
            seen_any_code = true;
            if in_header {
                if code.ends_with("by") {
                    in_header = false;
                }
                introduces = header_binder_names(code);
                LineKind::TheoremHeader
            } else {
                // Reclassify this first body line below.
                classify_body(code, &mut introduces, &mut hints)
            }
        } else {
            classify_body(code, &mut introduces, &mut hints)
        };

        if !matches!(kind, LineKind::Blank | LineKind::Comment) {
            references = idents(code);
            for name in &introduces {
                references.remove(name);
            }
            for hint in &hints {
                references.insert(hint.clone());
            }
        }

        lines.push(SketchLine {
            index,
            text: raw.to_string(),
            indent,
            kind,
            introduces,
            references,
            status: LineStatus::Active,
            hints,
        });
    }

    let mut sketch = Sketch {
        statement_id: statement_id.to_string(),
        lines,
        holes: Vec::new(),
        repair_iterations: 0,
        translation_rate: 1.0,
    };
    sketch.refresh_holes();
    sketch
}

fn classify_body(code: &str, introduces: &mut BTreeSet<String>, hints: &mut Vec<String>) -> LineKind {
    if let Some(parsed) = parse_prove_with(code) {
        *hints = parsed;
        return LineKind::Placeholder;
    }
    if code == "sorry" {
        return LineKind::Placeholder;
    }
    let word = first_word(code);
    match word {
        "have" | "let" | "suffices" | "obtain" => {
            *introduces = subgoal_intro_names(code);
            LineKind::SubgoalDecl
        }
        _ if code.starts_with('\u{00b7}') || code.starts_with('|') || code.starts_with("· ") => {
            *introduces = structural_intro_names(code);
            LineKind::Structural
        }
        _ if STRUCTURAL_KEYWORDS.contains(&word) => {
            *introduces = structural_intro_names(code);
            LineKind::Structural
        }
        _ => LineKind::ProofStep,
    }
}

/// Replace every `prove_with` line by the placeholder tactic acceptable to
/// the checker, preserving the hint list on the line (and therefore in the
/// corresponding hole).
pub fn rewrite_placeholders(mut sketch: Sketch) -> Sketch {
    for line in &mut sketch.lines {
        if line.kind == LineKind::Placeholder && line.text.trim() != "sorry" {
            line.text = format!("{}sorry", " ".repeat(line.indent));
        }
    }
    sketch.refresh_holes();
    sketch
}

/// Pull the final fenced code block out of a sketch-model completion, or
/// the whole text when the model answered with bare code.
pub fn extract_lean_block(completion: &str) -> String {
    let mut blocks = Vec::new();
    let mut current: Option<Vec<&str>> = None;
    for line in completion.lines() {
        let trimmed = line.trim();
        if let Some(block) = current.as_mut() {
            if trimmed.starts_with("```") {
                blocks.push(block.join("\n"));
                current = None;
            } else {
                block.push(line);
            }
        } else if trimmed == "```lean4" || trimmed == "```lean" || trimmed == "```" {
            // An opening fence only starts a block when something follows.
            current = Some(Vec::new());
        }
    }
    if let Some(block) = current {
        // Unterminated fence: take what we have.
        blocks.push(block.join("\n"));
    }
    blocks
        .into_iter()
        .filter(|b| !b.trim().is_empty())
        .next_back()
        .unwrap_or_else(|| completion.trim().to_string())
}

/// Drop header lines the model repeated (imports and lines equal to the
/// statement header): the verifier session already has them loaded.
pub fn strip_repeated_header(code: &str, stmt: &FormalStatement) -> String {
    let header_lines: BTreeSet<&str> = stmt.header.lines().map(str::trim).collect();
    code.lines()
        .filter(|line| {
            let t = line.trim();
            !(t.starts_with("import ") || (!t.is_empty() && header_lines.contains(t)))
        })
        .collect::<Vec<_>>()
        .join("\n")
}
