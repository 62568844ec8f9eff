//! Thinking-token filtering for reasoning-model output.

use serde::{Deserialize, Serialize};

/// Delimiters of the thinking region. QwQ- and R1-style models emit
/// `<think>`/`</think>`; other models may differ, so the pair is
/// configurable per model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThinkingMarkers {
    pub open: String,
    pub close: String,
}

impl Default for ThinkingMarkers {
    fn default() -> Self {
        ThinkingMarkers {
            open: "<think>".into(),
            close: "</think>".into(),
        }
    }
}

/// Remove every thinking region with the default markers and trim leading
/// whitespace. Total and idempotent.
pub fn strip_thinking(raw: &str) -> String {
    strip_thinking_with(raw, &ThinkingMarkers::default())
}

/// Remove every region delimited by the markers, inclusive. Markers do not
/// nest: the leftmost open pairs with the first close after it. An unclosed
/// open removes through end-of-text. Splicing can form a new marker across a
/// junction, so the scan repeats until a pass removes nothing — this is what
/// makes the function idempotent.
pub fn strip_thinking_with(raw: &str, markers: &ThinkingMarkers) -> String {
    let mut text = raw.to_string();
    loop {
        let stripped = strip_once(&text, markers);
        if stripped == text {
            break;
        }
        text = stripped;
    }
    text.trim_start().to_string()
}

fn strip_once(text: &str, markers: &ThinkingMarkers) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    loop {
        match rest.find(&markers.open) {
            None => {
                out.push_str(rest);
                break;
            }
            Some(open_at) => {
                out.push_str(&rest[..open_at]);
                let after_open = &rest[open_at + markers.open.len()..];
                match after_open.find(&markers.close) {
                    Some(close_at) => {
                        rest = &after_open[close_at + markers.close.len()..];
                    }
                    None => break, // unclosed: drop through end-of-text
                }
            }
        }
    }
    out
}

/// Rough token estimate used when an endpoint reports no usage breakdown:
/// one token per four characters, rounded up.
pub fn approx_tokens(text: &str) -> u64 {
    (text.chars().count() as u64).div_ceil(4)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Reference scanner: segment the text at marker boundaries and walk a
    /// two-state machine, repeated to a fixed point. Kept independent of the
    /// production single-pass splice.
    fn reference_strip(raw: &str, markers: &ThinkingMarkers) -> String {
        fn one_pass(text: &str, markers: &ThinkingMarkers) -> String {
            let mut kept = String::new();
            let mut inside = false;
            let mut i = 0;
            let bytes = text.as_bytes();
            while i < bytes.len() {
                if !inside && text[i..].starts_with(&markers.open) {
                    inside = true;
                    i += markers.open.len();
                } else if inside && text[i..].starts_with(&markers.close) {
                    inside = false;
                    i += markers.close.len();
                } else {
                    if !inside {
                        // advance one char, not one byte
                        let ch = text[i..].chars().next().unwrap();
                        kept.push(ch);
                        i += ch.len_utf8();
                    } else {
                        let ch = text[i..].chars().next().unwrap();
                        i += ch.len_utf8();
                    }
                }
            }
            kept
        }
        let mut text = raw.to_string();
        loop {
            let next = one_pass(&text, markers);
            if next == text {
                break;
            }
            text = next;
        }
        text.trim_start().to_string()
    }

    #[test]
    fn single_region() {
        assert_eq!(strip_thinking("<think>scratch</think>Step 1: x=1"), "Step 1: x=1");
    }

    #[test]
    fn no_markers_is_identity() {
        assert_eq!(strip_thinking("no markers here"), "no markers here");
    }

    #[test]
    fn unclosed_open_removes_to_end() {
        assert_eq!(strip_thinking("keep<think>drop forever"), "keep");
    }

    #[test]
    fn non_nesting_leftmost_open_first_close() {
        // The inner open is swallowed by the outer region.
        assert_eq!(strip_thinking("<think>a<think>b</think>c"), "c");
    }

    #[test]
    fn enumerated_marker_placements_match_reference() {
        let markers = ThinkingMarkers::default();
        let pieces = ["", "x", "<think>", "</think>", "yy"];
        // All sequences of 4 pieces: 5^4 cases.
        for a in pieces {
            for b in pieces {
                for c in pieces {
                    for d in pieces {
                        let input = format!("{a}{b}{c}{d}");
                        assert_eq!(
                            strip_thinking(&input),
                            reference_strip(&input, &markers),
                            "input {input:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn custom_markers() {
        let markers = ThinkingMarkers {
            open: "<reasoning>".into(),
            close: "</reasoning>".into(),
        };
        assert_eq!(
            strip_thinking_with("<reasoning>hmm</reasoning>answer", &markers),
            "answer"
        );
    }

    proptest! {
        #[test]
        fn idempotent(fragments in proptest::collection::vec(
            prop_oneof![
                Just("<think>".to_string()),
                Just("</think>".to_string()),
                Just("<thi".to_string()),
                Just("nk>".to_string()),
                "[a-z ]{0,6}",
            ],
            0..12,
        )) {
            let input = fragments.concat();
            let once = strip_thinking(&input);
            let twice = strip_thinking(&once);
            prop_assert_eq!(&once, &twice);
        }

        #[test]
        fn matches_reference(fragments in proptest::collection::vec(
            prop_oneof![
                Just("<think>".to_string()),
                Just("</think>".to_string()),
                "[a-z<>/ ]{0,5}",
            ],
            0..10,
        )) {
            let input = fragments.concat();
            let markers = ThinkingMarkers::default();
            prop_assert_eq!(strip_thinking(&input), reference_strip(&input, &markers));
        }
    }
}
