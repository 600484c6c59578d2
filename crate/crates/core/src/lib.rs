//! Augmented-AST serialization for code summarization.
//!
//! The pipeline parses Python source with a pinned Tree-sitter grammar
//! ([`syntax`]), injects lexical values and prunes syntax noise
//! ([`augment`]), and linearizes the result as node-index traversal (NIT),
//! structure-based traversal (SBT), a type-only preorder, or squeezed source
//! ([`serialize`]). [`corpus`] prepares filtered summarization corpora and
//! [`metrics`] scores generated summaries.

pub mod augment;
pub mod corpus;
pub mod metrics;
pub mod serialize;
pub mod syntax;
pub mod tokenize;

pub use augment::{augment, augment_with, AugNode, AugTree, RelabelRuleSet};
pub use serialize::{ReprKind, SerializedSequence};
pub use syntax::{count_nodes, parse_source, RawNode, RawTree, GRAMMAR_VERSION};
pub use tokenize::{Tokenizer, TokenizerKind};

#[cfg(test)]
pub(crate) const BALANCE_CHECK: &str = include_str!("../tests/data/balance_check.py");
