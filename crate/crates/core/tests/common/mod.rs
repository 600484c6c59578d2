//! Shared generators and fixtures for integration tests.
#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::LazyLock;

use astnit::augment::{AugNode, AugTree, RelabelRuleSet};
use astnit::corpus::{load_corpus, CorpusFields, Sample, Split};
use astnit::syntax::Grammar;
use proptest::prelude::*;
use proptest::sample::select;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

/// The bundled corpus of documented standard-library functions.
pub fn stdlib_corpus() -> Vec<Sample> {
    load_corpus(
        data("stdlib_functions.jsonl"),
        Split::Train,
        CorpusFields::default(),
    )
    .unwrap()
    .map(Result::unwrap)
    .collect()
}

pub static VOCABULARY: LazyLock<Vec<String>> = LazyLock::new(|| {
    Grammar::python()
        .node_kinds()
        .into_iter()
        .filter(|&(kind, named)| named && !kind.is_empty())
        .map(|(kind, _)| kind.to_string())
        .chain(
            RelabelRuleSet::with_variable_targets()
                .labels()
                .map(String::from),
        )
        .collect()
});

pub fn label() -> impl Strategy<Value = String> {
    prop_oneof![
        4 => select(VOCABULARY.clone()),
        1 => "[a-z][a-z0-9_]{0,10}",
        1 => "[A-Za-z_][A-Za-z0-9_]{0,8}",
    ]
}

pub fn value_text() -> impl Strategy<Value = String> {
    let piece = prop_oneof![
        4 => "[a-z0-9]{1,4}",
        1 => Just(";".to_string()),
        1 => Just("; ".to_string()),
        1 => Just("\\".to_string()),
        1 => Just(r"\;".to_string()),
        1 => Just("[".to_string()),
        1 => Just("]".to_string()),
        1 => Just("(".to_string()),
        1 => Just(")".to_string()),
        1 => Just(")identifier".to_string()),
        1 => Just(" ".to_string()),
        1 => Just("\n".to_string()),
        1 => Just("\r\n".to_string()),
        1 => Just("\t".to_string()),
        1 => Just("_".to_string()),
        1 => Just(",".to_string()),
        1 => Just("\u{a0}".to_string()),
        1 => Just("…".to_string()),
        1 => Just("\\&".to_string()),
        1 => select(VOCABULARY.clone()),
    ];
    prop_oneof![
        6 => prop::collection::vec(piece, 0..8).prop_map(|parts| parts.concat()),
        1 => any::<String>(),
    ]
}

pub fn value() -> impl Strategy<Value = Option<String>> {
    prop_oneof![2 => Just(None), 3 => value_text().prop_map(Some)]
}

/// Trees of at most 8 levels and at most 5 children per node.
pub fn tree() -> impl Strategy<Value = AugTree> {
    let leaf = (label(), value()).prop_map(|(label, value)| AugNode {
        label,
        value,
        children: Vec::new(),
    });
    leaf.prop_recursive(7, 200, 5, |inner| {
        (label(), value(), prop::collection::vec(inner, 1..=5)).prop_map(
            |(label, value, children)| AugNode {
                label,
                value,
                children,
            },
        )
    })
    .prop_map(AugTree::from_root)
}

pub fn depth(node: &AugNode) -> usize {
    1 + node.children.iter().map(depth).max().unwrap_or(0)
}

pub fn max_arity(node: &AugNode) -> usize {
    node.preorder().map(|n| n.children.len()).max().unwrap_or(0)
}

/// Clipped n-gram matches by scanning every window pair.
pub fn brute_ngrams(cand: &[String], refs: &[String], n: usize) -> (usize, usize) {
    if cand.len() < n {
        return (0, 0);
    }
    let cand_grams: Vec<&[String]> = cand.windows(n).collect();
    let ref_grams: Vec<&[String]> = if refs.len() >= n {
        refs.windows(n).collect()
    } else {
        Vec::new()
    };
    let mut matched = 0;
    let mut seen: Vec<&[String]> = Vec::new();
    for gram in &cand_grams {
        if seen.contains(gram) {
            continue;
        }
        seen.push(gram);
        let in_cand = cand_grams.iter().filter(|g| *g == gram).count();
        let in_ref = ref_grams.iter().filter(|g| *g == gram).count();
        matched += in_cand.min(in_ref);
    }
    (matched, cand_grams.len())
}

pub fn brute_bleu(cand: &[String], refs: &[String]) -> f64 {
    let p: Vec<f64> = (1..=4)
        .map(|n| {
            let (m, t) = brute_ngrams(cand, refs, n);
            if n == 1 {
                m as f64 / t as f64
            } else {
                (m as f64 + 1.0) / (t as f64 + 1.0)
            }
        })
        .collect();
    if p[0] == 0.0 {
        return 0.0;
    }
    let geo = (p.iter().map(|x| x.ln()).sum::<f64>() / 4.0).exp();
    let (c, r) = (cand.len() as f64, refs.len() as f64);
    let bp = if c > r { 1.0 } else { (1.0 - r / c).exp() };
    100.0 * bp * geo
}

pub fn recursive_lcs(a: &[String], b: &[String]) -> usize {
    match (a.split_first(), b.split_first()) {
        (Some((x, ra)), Some((y, rb))) => {
            if x == y {
                1 + recursive_lcs(ra, rb)
            } else {
                recursive_lcs(ra, b).max(recursive_lcs(a, rb))
            }
        }
        _ => 0,
    }
}
