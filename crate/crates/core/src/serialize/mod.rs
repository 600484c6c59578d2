//! Linear input representations: AST(NIT), AST(SBT), AST(Preorder) and Code.
//!
//! NIT and SBT serialize the augmented tree; Preorder lists the kinds of the
//! raw tree's named nodes; Code is the source with whitespace squeezed.

pub mod nit;
pub mod sbt;

use std::borrow::Cow;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::augment::{augment_with, AugTree, AugmentError, RelabelRuleSet};
use crate::syntax::{parse_source, RawTree, SyntaxError};
use crate::tokenize::{Tokenizer, TokenizerKind};

pub use nit::{nit_records, nit_text, parse_nit, parse_nit_records, NitError, NitRecord};
pub use sbt::{parse_sbt, sbt_text, SbtCodec, SbtError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReprKind {
    Nit,
    Sbt,
    Preorder,
    Code,
}

impl ReprKind {
    pub const ALL: [ReprKind; 4] = [
        ReprKind::Nit,
        ReprKind::Sbt,
        ReprKind::Preorder,
        ReprKind::Code,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ReprKind::Nit => "nit",
            ReprKind::Sbt => "sbt",
            ReprKind::Preorder => "preorder",
            ReprKind::Code => "code",
        }
    }

    /// Display name used in report tables.
    pub fn title(self) -> &'static str {
        match self {
            ReprKind::Nit => "AST(NIT)",
            ReprKind::Sbt => "AST(SBT)",
            ReprKind::Preorder => "AST(Preorder)",
            ReprKind::Code => "Code",
        }
    }
}

impl fmt::Display for ReprKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReprKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ReprKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                format!("unknown representation {s:?} (expected nit, sbt, preorder or code)")
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SerializedSequence {
    pub kind: ReprKind,
    pub text: String,
    pub token_count: usize,
}

impl SerializedSequence {
    pub fn new(kind: ReprKind, text: String, tokenizer: &dyn Tokenizer) -> Self {
        let token_count = tokenizer.count(&text);
        SerializedSequence {
            kind,
            text,
            token_count,
        }
    }
}

pub fn preorder_text(tree: &RawTree) -> String {
    tree.root
        .preorder()
        .filter(|n| n.named)
        .map(|n| n.kind)
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn code_text(source: &str) -> String {
    source.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn serialize_nit(tree: &AugTree) -> SerializedSequence {
    SerializedSequence::new(ReprKind::Nit, nit_text(tree), &TokenizerKind::Whitespace)
}

pub fn serialize_sbt(tree: &AugTree) -> SerializedSequence {
    SerializedSequence::new(ReprKind::Sbt, sbt_text(tree), &TokenizerKind::Whitespace)
}

pub fn serialize_preorder(tree: &RawTree) -> SerializedSequence {
    SerializedSequence::new(
        ReprKind::Preorder,
        preorder_text(tree),
        &TokenizerKind::Whitespace,
    )
}

pub fn serialize_code(source: &str) -> SerializedSequence {
    SerializedSequence::new(
        ReprKind::Code,
        code_text(source),
        &TokenizerKind::Whitespace,
    )
}

#[derive(Debug, Error)]
pub enum RenderError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Augment(#[from] AugmentError),
}

/// All four representations of one source text, sharing a single parse.
#[derive(Debug, Clone)]
pub struct Rendered {
    pub raw: RawTree,
    pub aug: AugTree,
    pub nit: String,
    pub sbt: String,
    pub preorder: String,
    pub code: String,
}

impl Rendered {
    pub fn get(&self, kind: ReprKind) -> &str {
        match kind {
            ReprKind::Nit => &self.nit,
            ReprKind::Sbt => &self.sbt,
            ReprKind::Preorder => &self.preorder,
            ReprKind::Code => &self.code,
        }
    }
}

pub fn render_all(source: &str, rules: &RelabelRuleSet) -> Result<Rendered, RenderError> {
    let raw = parse_source(source)?;
    let aug = augment_with(&raw, rules)?;
    let codec = codec_for(rules);
    Ok(Rendered {
        nit: nit_text(&aug),
        sbt: codec.encode(&aug),
        preorder: preorder_text(&raw),
        code: code_text(source),
        raw,
        aug,
    })
}

/// Render one representation. AST kinds require an error-free parse; Code
/// never fails.
pub fn render(kind: ReprKind, source: &str, rules: &RelabelRuleSet) -> Result<String, RenderError> {
    match kind {
        ReprKind::Code => Ok(code_text(source)),
        ReprKind::Preorder => {
            let raw = parse_source(source)?;
            if raw.has_errors {
                let span = raw.first_error().map_or(raw.root.span, |n| n.span);
                return Err(AugmentError::ErrorTree(span).into());
            }
            Ok(preorder_text(&raw))
        }
        ReprKind::Nit => Ok(nit_text(&augment_with(&parse_source(source)?, rules)?)),
        ReprKind::Sbt => Ok(codec_for(rules).encode(&augment_with(&parse_source(source)?, rules)?)),
    }
}

/// The Python codec, extended with any labels a custom rule set introduces.
pub fn codec_for(rules: &RelabelRuleSet) -> Cow<'static, SbtCodec> {
    let base = SbtCodec::python();
    if rules.labels().all(|l| base.knows(l)) {
        Cow::Borrowed(base)
    } else {
        Cow::Owned(base.with_labels(rules.labels().map(String::from)))
    }
}
