//! Text normalization and tokenization.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

/// Placeholder substituted for every URL during normalization.
pub const URL_MARKER: &str = "<url>";

fn url_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?:https?://|www\.)\S+").expect("valid url regex"))
}

/// Canonical form used everywhere text enters the pipeline.
///
/// Non-whitespace control characters are dropped, the text is lowercased,
/// URLs become [`URL_MARKER`], and whitespace runs collapse to one space.
/// The function is idempotent.
pub fn normalize_text(raw: &str) -> String {
    let cleaned: String = raw
        .chars()
        .filter_map(|c| {
            if c.is_whitespace() {
                Some(' ')
            } else if c.is_control() {
                None
            } else {
                Some(c)
            }
        })
        .collect();
    let lowered = cleaned.to_lowercase();
    let replaced = url_pattern().replace_all(&lowered, URL_MARKER);
    let mut out = String::with_capacity(replaced.len());
    for word in replaced.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// A token with its byte span in the normalized text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub start: usize,
    pub end: usize,
}

/// Split normalized text into word tokens.
///
/// A token is a maximal run of letters and digits, where a hyphen is kept when
/// it sits between two such characters (`covid-19`). The literal `<url>`
/// marker is a single token. Everything else separates tokens.
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let word = |c: char| c.is_alphanumeric();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c == '<' && text[pos..].starts_with(URL_MARKER) {
            tokens.push(Token {
                surface: URL_MARKER.to_string(),
                start: pos,
                end: pos + URL_MARKER.len(),
            });
            i += URL_MARKER.chars().count();
            continue;
        }
        if !word(c) {
            i += 1;
            continue;
        }
        let start = pos;
        let mut j = i + 1;
        while j < chars.len() {
            let cj = chars[j].1;
            if word(cj) {
                j += 1;
            } else if cj == '-' && j + 1 < chars.len() && word(chars[j + 1].1) {
                j += 2;
            } else {
                break;
            }
        }
        let end = chars.get(j).map_or(text.len(), |&(p, _)| p);
        tokens.push(Token {
            surface: text[start..end].to_string(),
            start,
            end,
        });
        i = j;
    }
    tokens
}

/// Normalize then tokenize.
pub fn analyze(raw: &str) -> (String, Vec<Token>) {
    let normalized = normalize_text(raw);
    let tokens = tokenize(&normalized);
    (normalized, tokens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn surfaces(text: &str) -> Vec<String> {
        tokenize(text).into_iter().map(|t| t.surface).collect()
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(normalize_text("COVID-19  Spreads"), "covid-19 spreads");
        assert_eq!(normalize_text("see https://x.co/a now"), "see <url> now");
        assert_eq!(normalize_text(""), "");
        assert_eq!(normalize_text("  a\tb\u{0007}c\n"), "a bc");
        assert_eq!(normalize_text("visit WWW.Example.com/x."), "visit <url>");
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(
            surfaces("covid-19 spreads fast"),
            ["covid-19", "spreads", "fast"]
        );
        assert_eq!(surfaces("see <url> now"), ["see", "<url>", "now"]);
        assert!(tokenize("").is_empty());
        assert_eq!(surfaces("don't -- panic-"), ["don", "t", "panic"]);
        assert_eq!(surfaces("<pad> <unk>"), ["pad", "unk"]);
        assert_eq!(surfaces("wuhan,china"), ["wuhan", "china"]);
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(s in "\\PC{0,40}|[ a-zA-Z0-9:/.<>\\-\t\n\u{7}]{0,40}") {
            let once = normalize_text(&s);
            prop_assert_eq!(normalize_text(&once), once);
        }

        #[test]
        fn token_offsets_reconstruct_surfaces(s in "\\PC{0,60}") {
            let text = normalize_text(&s);
            for t in tokenize(&text) {
                prop_assert!(t.start < t.end);
                prop_assert_eq!(&text[t.start..t.end], t.surface.as_str());
            }
        }

        #[test]
        fn joined_tokens_retokenize_identically(s in "[a-z0-9 \\-<>url.,]{0,60}") {
            let text = normalize_text(&s);
            let first: Vec<String> = tokenize(&text).into_iter().map(|t| t.surface).collect();
            let joined = first.join(" ");
            let second: Vec<String> = tokenize(&normalize_text(&joined)).into_iter().map(|t| t.surface).collect();
            prop_assert_eq!(first, second);
        }
    }
}
