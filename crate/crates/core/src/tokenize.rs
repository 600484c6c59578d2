//! Pluggable token counting for sequence lengths and corpus statistics.

use std::fmt;
use std::str::FromStr;

pub trait Tokenizer: Send + Sync {
    fn name(&self) -> &str;
    fn count(&self, text: &str) -> usize;
}

/// Built-in tokenizers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum TokenizerKind {
    /// Maximal runs of non-whitespace.
    #[default]
    Whitespace,
    /// Unicode scalar values, whitespace included.
    Chars,
}

impl Tokenizer for TokenizerKind {
    fn name(&self) -> &str {
        match self {
            TokenizerKind::Whitespace => "whitespace",
            TokenizerKind::Chars => "chars",
        }
    }

    fn count(&self, text: &str) -> usize {
        match self {
            TokenizerKind::Whitespace => text.split_whitespace().count(),
            TokenizerKind::Chars => text.chars().count(),
        }
    }
}

impl fmt::Display for TokenizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TokenizerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "whitespace" => Ok(TokenizerKind::Whitespace),
            "chars" => Ok(TokenizerKind::Chars),
            other => Err(format!(
                "unknown tokenizer {other:?} (expected whitespace or chars)"
            )),
        }
    }
}
