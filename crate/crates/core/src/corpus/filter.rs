//! Method-level filtering rules and deduplication.

use std::collections::HashSet;

use rayon::prelude::*;

use super::sample::{RejectReason, Sample};
use crate::syntax::{parse_source, RawNode, RawTree};

/// Text up to and including the first `.` followed by whitespace or the end
/// of the text; without one, the first line. Abbreviations are not special.
pub fn first_sentence(summary: &str) -> String {
    let text = summary.trim_start();
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if c == '.' && chars.peek().is_none_or(|&(_, next)| next.is_whitespace()) {
            return text[..=i].trim_end().to_string();
        }
    }
    text.lines()
        .next()
        .unwrap_or_default()
        .trim_end()
        .to_string()
}

fn squeeze(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Detectors for constructors, property accessors and test cases, plus the
/// minimum summary length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodHeuristics {
    pub constructor_names: Vec<String>,
    /// Decorators (without `@`) that mark a property accessor.
    pub accessor_decorators: Vec<String>,
    /// Decorator suffixes that mark an accessor, e.g. `.setter`.
    pub accessor_suffixes: Vec<String>,
    pub test_name_prefixes: Vec<String>,
    /// Substrings of a decorator that mark a test context.
    pub test_decorator_markers: Vec<String>,
    pub min_summary_words: usize,
}

impl Default for MethodHeuristics {
    fn default() -> Self {
        let strings = |items: &[&str]| items.iter().map(|s| s.to_string()).collect();
        MethodHeuristics {
            constructor_names: strings(&["__init__", "__new__"]),
            accessor_decorators: strings(&["property"]),
            accessor_suffixes: strings(&[".setter", ".getter"]),
            test_name_prefixes: strings(&["test"]),
            test_decorator_markers: strings(&["pytest", "unittest"]),
            min_summary_words: 4,
        }
    }
}

/// Name and decorators of the first function definition in a tree.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MethodInfo {
    pub name: Option<String>,
    pub decorators: Vec<String>,
}

impl MethodInfo {
    pub fn from_tree(tree: &RawTree) -> Self {
        fn find<'a>(
            node: &'a RawNode,
            parent: Option<&'a RawNode>,
        ) -> Option<(&'a RawNode, Option<&'a RawNode>)> {
            if node.kind == "function_definition" {
                return Some((node, parent));
            }
            node.children.iter().find_map(|c| find(c, Some(node)))
        }
        let Some((def, parent)) = find(&tree.root, None) else {
            return MethodInfo::default();
        };
        let name = def
            .children
            .iter()
            .find(|c| c.field == Some("name"))
            .map(|n| tree.text(n).to_string());
        let decorators = parent
            .filter(|p| p.kind == "decorated_definition")
            .map(|p| {
                p.children
                    .iter()
                    .filter(|c| c.kind == "decorator")
                    .map(|d| {
                        let text = tree.text(d).trim();
                        text.strip_prefix('@').unwrap_or(text).trim().to_string()
                    })
                    .collect()
            })
            .unwrap_or_default();
        MethodInfo { name, decorators }
    }
}

impl MethodHeuristics {
    pub fn method_kind(&self, info: &MethodInfo) -> Option<RejectReason> {
        let name = info.name.as_deref().unwrap_or_default();
        if self.constructor_names.iter().any(|n| n == name) {
            return Some(RejectReason::Constructor);
        }
        let accessor = info.decorators.iter().any(|d| {
            self.accessor_decorators.iter().any(|a| a == d)
                || self
                    .accessor_suffixes
                    .iter()
                    .any(|s| d.ends_with(s.as_str()))
        });
        if accessor {
            return Some(RejectReason::Accessor);
        }
        let test = (!name.is_empty()
            && self
                .test_name_prefixes
                .iter()
                .any(|p| name.starts_with(p.as_str())))
            || info.decorators.iter().any(|d| {
                self.test_decorator_markers
                    .iter()
                    .any(|m| d.contains(m.as_str()))
            });
        test.then_some(RejectReason::TestCase)
    }

    /// Apply the method-kind, summary-length and parse rules in that order
    /// and return the first failing reason. The summary must already be
    /// reduced to its first sentence.
    pub fn filter_sample(&self, sample: &Sample) -> Result<(), RejectReason> {
        if let Some(reason) = sample.reason() {
            return Err(reason);
        }
        let tree = parse_source(&sample.code).map_err(|_| RejectReason::ParseFailure)?;
        if let Some(reason) = self.method_kind(&MethodInfo::from_tree(&tree)) {
            return Err(reason);
        }
        if sample.summary.split_whitespace().count() < self.min_summary_words {
            return Err(RejectReason::ShortSummary);
        }
        if tree.has_errors {
            return Err(RejectReason::ParseFailure);
        }
        Ok(())
    }
}

/// Key under which two samples count as duplicates.
pub fn dedup_key(code: &str) -> String {
    squeeze(code)
}

/// Keep the first occurrence of each code text; later kept samples with the
/// same whitespace-normalized code are rejected as duplicates.
pub fn dedup(samples: impl IntoIterator<Item = Sample>) -> impl Iterator<Item = Sample> {
    let mut seen = HashSet::new();
    samples.into_iter().map(move |mut sample| {
        if sample.is_kept() && !seen.insert(dedup_key(&sample.code)) {
            sample.reject(RejectReason::Duplicate);
        }
        sample
    })
}

/// Reduce summaries to their first sentence, apply the filter rules in
/// parallel, then deduplicate sequentially. Output order equals input order.
pub fn prepare(samples: Vec<Sample>, heuristics: &MethodHeuristics) -> Vec<Sample> {
    let filtered: Vec<Sample> = samples
        .into_par_iter()
        .map(|mut sample| {
            if sample.is_kept() {
                sample.summary = squeeze(&first_sentence(&sample.summary));
                if let Err(reason) = heuristics.filter_sample(&sample) {
                    sample.reject(reason);
                }
            }
            sample
        })
        .collect();
    dedup(filtered).collect()
}
