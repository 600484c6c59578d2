mod common;

use std::collections::BTreeMap;

use astnit::metrics::{bleu4, lcs_len, meteor, meteor_alignment, ngram_matches, rouge_l};
use common::{brute_bleu, brute_ngrams, recursive_lcs};
use proptest::prelude::*;
use proptest::sample::select;

const WORDS: &[&str] = &[
    "the", "a", "file", "files", "run", "running", "runs", "cat", "sat", "on", "mat", "path", ".",
    ",",
];

fn sentence(max: usize) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(select(WORDS).prop_map(String::from), 0..=max)
}

fn nonempty(max: usize) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(select(WORDS).prop_map(String::from), 1..=max)
}

fn stem(word: &str) -> String {
    rust_stemmers::Stemmer::create(rust_stemmers::Algorithm::English)
        .stem(word)
        .into_owned()
}

/// Every partial one-to-one alignment whose pairs are exact or stem-equal;
/// keeps the lexicographic best (most exact, then most stem, then fewest
/// chunks) and scores it.
fn exhaustive_meteor(cand: &[String], refs: &[String]) -> (usize, usize, usize, f64) {
    fn walk(
        i: usize,
        cand: &[String],
        refs: &[String],
        used: &mut Vec<bool>,
        pairs: &mut Vec<(usize, usize, bool)>,
        best: &mut Option<(usize, usize, usize)>,
    ) {
        if i == cand.len() {
            let exact = pairs.iter().filter(|p| p.2).count();
            let stem = pairs.len() - exact;
            let chunks = pairs
                .iter()
                .enumerate()
                .filter(|(k, &(ci, rj, _))| {
                    *k == 0 || !(pairs[k - 1].0 + 1 == ci && pairs[k - 1].1 + 1 == rj)
                })
                .count();
            let better = match *best {
                None => true,
                Some((e, s, c)) => {
                    (exact, stem, std::cmp::Reverse(chunks)) > (e, s, std::cmp::Reverse(c))
                }
            };
            if better {
                *best = Some((exact, stem, chunks));
            }
            return;
        }
        walk(i + 1, cand, refs, used, pairs, best);
        for j in 0..refs.len() {
            if used[j] {
                continue;
            }
            let exact = cand[i] == refs[j];
            if exact || stem(&cand[i]) == stem(&refs[j]) {
                used[j] = true;
                pairs.push((i, j, exact));
                walk(i + 1, cand, refs, used, pairs, best);
                pairs.pop();
                used[j] = false;
            }
        }
    }
    let mut best = None;
    walk(
        0,
        cand,
        refs,
        &mut vec![false; refs.len()],
        &mut Vec::new(),
        &mut best,
    );
    let (exact, stem, chunks) = best.unwrap();
    let m = (exact + stem) as f64;
    let score = if m == 0.0 {
        0.0
    } else {
        let p = m / cand.len() as f64;
        let r = m / refs.len() as f64;
        let fmean = p * r / (0.9 * p + 0.1 * r);
        fmean * (1.0 - 0.5 * (chunks as f64 / m).powi(3))
    };
    (exact, stem, chunks, score)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ngram_counts_match_brute_force(c in sentence(10), r in sentence(10)) {
        let fast = ngram_matches(&c, &r);
        for n in 1..=4 {
            let (matched, total) = brute_ngrams(&c, &r, n);
            prop_assert_eq!((fast[n - 1].matched, fast[n - 1].total), (matched, total));
        }
    }

    #[test]
    fn bleu_matches_brute_force(c in nonempty(10), r in nonempty(10)) {
        prop_assert!((bleu4(&c, &r) - brute_bleu(&c, &r)).abs() <= 1e-9);
    }

    #[test]
    fn lcs_matches_recursion(a in sentence(10), b in sentence(10)) {
        prop_assert_eq!(lcs_len(&a, &b), recursive_lcs(&a, &b));
    }

    #[test]
    fn meteor_matches_exhaustive_alignment(c in nonempty(6), r in nonempty(6)) {
        let (exact, stem, chunks, score) = exhaustive_meteor(&c, &r);
        let alignment = meteor_alignment(&c, &r);
        prop_assert_eq!((alignment.exact, alignment.stem, alignment.chunks), (exact, stem, chunks));
        prop_assert!((meteor(&c, &r) - score).abs() <= 1e-9);
    }

    #[test]
    fn scores_are_bounded(c in sentence(10), r in sentence(10)) {
        let b = bleu4(&c, &r);
        let m = meteor(&c, &r);
        let l = rouge_l(&c, &r);
        prop_assert!((0.0..=100.0).contains(&b));
        prop_assert!((0.0..1.0).contains(&m));
        prop_assert!((0.0..=1.0).contains(&l));
    }

    #[test]
    fn rouge_is_symmetric(a in sentence(10), b in sentence(10)) {
        prop_assert!((rouge_l(&a, &b) - rouge_l(&b, &a)).abs() <= 1e-12);
    }

    #[test]
    fn renaming_tokens_changes_nothing(c in nonempty(10), r in nonempty(10)) {
        // injective renaming onto tokens with no shared stems
        let mut names = BTreeMap::new();
        let mut rename = |t: &String| {
            let next = names.len();
            names.entry(t.clone()).or_insert_with(|| format!("q{next}x")).clone()
        };
        let c2: Vec<String> = c.iter().map(&mut rename).collect();
        let r2: Vec<String> = r.iter().map(&mut rename).collect();
        prop_assert!((bleu4(&c, &r) - bleu4(&c2, &r2)).abs() <= 1e-9);
        prop_assert!((rouge_l(&c, &r) - rouge_l(&c2, &r2)).abs() <= 1e-12);
    }

    #[test]
    fn appending_a_reference_token_keeps_recall(c in sentence(8), r in nonempty(10), pick in any::<prop::sample::Index>()) {
        prop_assume!(c.len() < r.len());
        let mut longer = c.clone();
        longer.push(r[pick.index(r.len())].clone());
        prop_assert!(lcs_len(&longer, &r) >= lcs_len(&c, &r));
    }

    #[test]
    fn identity_scores(s in nonempty(12)) {
        prop_assert_eq!(bleu4(&s, &s), 100.0);
        prop_assert_eq!(rouge_l(&s, &s), 1.0);
        let m = s.len() as f64;
        prop_assert!((meteor(&s, &s) - (1.0 - 0.5 * (1.0 / m).powi(3))).abs() <= 1e-9);
    }
}

#[test]
fn frozen_reference_values() {
    let t = |s: &str| s.split_whitespace().map(String::from).collect::<Vec<_>>();
    let close = |a: f64, b: f64| (a - b).abs() < 1e-9;
    assert!(close(
        bleu4(&t("the cat sat on the mat"), &t("the cat is on the mat")),
        48.54917717073234
    ));
    assert!(close(
        bleu4(&t("the cat"), &t("the cat sat on the mat")),
        13.53352832366127
    ));
    assert_eq!(bleu4(&t("a b c"), &t("x y z w")), 0.0);
    assert!(close(rouge_l(&t("a c d"), &t("a b c d")), 6.0 / 7.0));
}
