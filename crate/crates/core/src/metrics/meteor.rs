use std::collections::HashMap;
use std::sync::LazyLock;

use rust_stemmers::{Algorithm, Stemmer};

const ALPHA: f64 = 0.9;
const GAMMA: f64 = 0.5;
const BETA: f64 = 3.0;
/// Search nodes explored after the first complete alignment is found.
const SEARCH_BUDGET: usize = 200_000;

static STEMMER: LazyLock<Stemmer> = LazyLock::new(|| Stemmer::create(Algorithm::English));

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    /// `(candidate index, reference index)` pairs sorted by candidate index.
    pub pairs: Vec<(usize, usize)>,
    pub exact: usize,
    pub stem: usize,
    pub chunks: usize,
}

impl Alignment {
    pub fn matches(&self) -> usize {
        self.pairs.len()
    }
}

struct Search<'a> {
    options: &'a [Vec<(usize, bool)>],
    exact_target: usize,
    stem_target: usize,
    exact_suffix: Vec<usize>,
    any_suffix: Vec<usize>,
    used: Vec<bool>,
    pairs: Vec<(usize, usize)>,
    best: Option<Alignment>,
    visited: usize,
}

impl Search<'_> {
    fn run(&mut self, i: usize, exact: usize, stem: usize, chunks: usize) {
        if self.best.is_some() {
            self.visited += 1;
            if self.visited > SEARCH_BUDGET {
                return;
            }
        }
        if self.best.as_ref().is_some_and(|b| chunks >= b.chunks) {
            return;
        }
        if exact + self.exact_suffix[i] < self.exact_target
            || exact + stem + self.any_suffix[i] < self.exact_target + self.stem_target
            || exact > self.exact_target
            || stem > self.stem_target
        {
            return;
        }
        if i == self.options.len() {
            self.best = Some(Alignment {
                pairs: self.pairs.clone(),
                exact,
                stem,
                chunks,
            });
            return;
        }
        let last = self.pairs.last().copied();
        let continues = |j: usize| last.is_some_and(|(li, lj)| li + 1 == i && lj + 1 == j);

        // Extending the current chunk first finds low-chunk alignments early.
        let mut order: Vec<(usize, bool)> = self.options[i]
            .iter()
            .copied()
            .filter(|&(j, _)| !self.used[j])
            .collect();
        order.sort_by_key(|&(j, is_exact)| (!continues(j), !is_exact, j));

        for (j, is_exact) in order {
            self.used[j] = true;
            self.pairs.push((i, j));
            let new_chunks = chunks + usize::from(!continues(j));
            if is_exact {
                self.run(i + 1, exact + 1, stem, new_chunks);
            } else {
                self.run(i + 1, exact, stem + 1, new_chunks);
            }
            self.pairs.pop();
            self.used[j] = false;
        }
        self.run(i + 1, exact, stem, chunks);
    }
}

/// Staged alignment: the exact stage matches as many identical tokens as
/// possible, the stem stage then matches as many remaining tokens with equal
/// stems as possible. Among alignments reaching both maxima the one with the
/// fewest chunks is returned.
pub fn meteor_alignment<T: AsRef<str>>(candidate: &[T], reference: &[T]) -> Alignment {
    let cand: Vec<String> = candidate
        .iter()
        .map(|t| t.as_ref().to_lowercase())
        .collect();
    let refs: Vec<String> = reference
        .iter()
        .map(|t| t.as_ref().to_lowercase())
        .collect();
    let cand_stems: Vec<String> = cand.iter().map(|t| STEMMER.stem(t).into_owned()).collect();
    let ref_stems: Vec<String> = refs.iter().map(|t| STEMMER.stem(t).into_owned()).collect();

    // Stage maxima follow from token multisets.
    let mut cand_counts: HashMap<&str, usize> = HashMap::new();
    let mut ref_counts: HashMap<&str, usize> = HashMap::new();
    for t in &cand {
        *cand_counts.entry(t).or_default() += 1;
    }
    for t in &refs {
        *ref_counts.entry(t).or_default() += 1;
    }
    let mut exact_target = 0;
    let mut cand_left: HashMap<&str, usize> = HashMap::new();
    let mut ref_left: HashMap<&str, usize> = HashMap::new();
    for (&word, &c) in &cand_counts {
        let r = ref_counts.get(word).copied().unwrap_or(0);
        exact_target += c.min(r);
        if c > r {
            let stem = &cand_stems[cand.iter().position(|t| t == word).unwrap()];
            *cand_left.entry(stem.as_str()).or_default() += c - r;
        }
    }
    for (&word, &r) in &ref_counts {
        let c = cand_counts.get(word).copied().unwrap_or(0);
        if r > c {
            let stem = &ref_stems[refs.iter().position(|t| t == word).unwrap()];
            *ref_left.entry(stem.as_str()).or_default() += r - c;
        }
    }
    let stem_target: usize = cand_left
        .iter()
        .map(|(stem, &c)| c.min(ref_left.get(stem).copied().unwrap_or(0)))
        .sum();

    let options: Vec<Vec<(usize, bool)>> = (0..cand.len())
        .map(|i| {
            (0..refs.len())
                .filter_map(|j| {
                    if cand[i] == refs[j] {
                        Some((j, true))
                    } else if cand_stems[i] == ref_stems[j] {
                        Some((j, false))
                    } else {
                        None
                    }
                })
                .collect()
        })
        .collect();

    let mut exact_suffix = vec![0; cand.len() + 1];
    let mut any_suffix = vec![0; cand.len() + 1];
    for i in (0..cand.len()).rev() {
        exact_suffix[i] = exact_suffix[i + 1] + usize::from(options[i].iter().any(|o| o.1));
        any_suffix[i] = any_suffix[i + 1] + usize::from(!options[i].is_empty());
    }

    let mut search = Search {
        options: &options,
        exact_target,
        stem_target,
        exact_suffix,
        any_suffix,
        used: vec![false; refs.len()],
        pairs: Vec::new(),
        best: None,
        visited: 0,
    };
    search.run(0, 0, 0, 0);
    search.best.unwrap_or(Alignment {
        pairs: Vec::new(),
        exact: 0,
        stem: 0,
        chunks: 0,
    })
}

/// METEOR with exact and stem stages, alpha 0.9, fragmentation penalty
/// `0.5 * (chunks / matches)^3`. No synonym stage.
pub fn meteor<T: AsRef<str>>(candidate: &[T], reference: &[T]) -> f64 {
    if candidate.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let alignment = meteor_alignment(candidate, reference);
    let matches = alignment.matches() as f64;
    if matches == 0.0 {
        return 0.0;
    }
    let precision = matches / candidate.len() as f64;
    let recall = matches / reference.len() as f64;
    let fmean = precision * recall / (ALPHA * precision + (1.0 - ALPHA) * recall);
    let penalty = GAMMA * (alignment.chunks as f64 / matches).powf(BETA);
    fmean * (1.0 - penalty)
}
