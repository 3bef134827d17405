use std::fmt;

use serde::{Deserialize, Serialize};

/// How prompt lengths are measured.
///
/// `Whitespace` counts maximal runs of non-whitespace characters.
/// `CharsPerToken(r)` approximates a subword tokenizer as `ceil(chars / r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", content = "ratio", rename_all = "snake_case")]
pub enum TokenCounter {
    #[default]
    Whitespace,
    CharsPerToken(f64),
}

impl TokenCounter {
    pub fn count(&self, text: &str) -> usize {
        match *self {
            TokenCounter::Whitespace => text.split_whitespace().count(),
            TokenCounter::CharsPerToken(r) => (text.chars().count() as f64 / r).ceil() as usize,
        }
    }

    /// Index of the token that contains (or starts at) `byte_offset`.
    pub fn token_index_at(&self, text: &str, byte_offset: usize) -> usize {
        let byte_offset = byte_offset.min(text.len());
        match *self {
            TokenCounter::Whitespace => {
                let mut starts = 0usize;
                let mut prev_space = true;
                for (i, c) in text.char_indices() {
                    if i > byte_offset {
                        break;
                    }
                    let space = c.is_whitespace();
                    if !space && prev_space {
                        starts += 1;
                    }
                    prev_space = space;
                }
                starts.saturating_sub(1)
            }
            TokenCounter::CharsPerToken(r) => {
                (text[..byte_offset].chars().count() as f64 / r).floor() as usize
            }
        }
    }

    pub fn parse(s: &str) -> Option<TokenCounter> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("whitespace") {
            return Some(TokenCounter::Whitespace);
        }
        let r = s.strip_prefix("chars/").or_else(|| s.strip_prefix("chars_per_token:"))?;
        r.parse::<f64>().ok().filter(|r| *r > 0.0).map(TokenCounter::CharsPerToken)
    }
}

impl fmt::Display for TokenCounter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenCounter::Whitespace => f.write_str("whitespace"),
            TokenCounter::CharsPerToken(r) => write!(f, "chars/{r}"),
        }
    }
}
