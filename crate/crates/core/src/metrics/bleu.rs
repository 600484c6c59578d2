use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NgramMatch {
    /// Candidate n-grams matched in the reference, clipped by reference counts.
    pub matched: usize,
    /// Candidate n-grams of this order.
    pub total: usize,
}

fn counts<T: AsRef<str>>(tokens: &[T], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut map = HashMap::new();
    for window in tokens.windows(n) {
        let key: Vec<&str> = window.iter().map(AsRef::as_ref).collect();
        *map.entry(key).or_insert(0) += 1;
    }
    map
}

/// Clipped n-gram matches for n = 1..=4.
pub fn ngram_matches<T: AsRef<str>>(candidate: &[T], reference: &[T]) -> [NgramMatch; 4] {
    let mut out = [NgramMatch::default(); 4];
    for (i, slot) in out.iter_mut().enumerate() {
        let n = i + 1;
        let cand = counts(candidate, n);
        let refs = counts(reference, n);
        slot.total = candidate.len().saturating_sub(n - 1);
        slot.matched = cand
            .iter()
            .map(|(gram, &c)| c.min(refs.get(gram).copied().unwrap_or(0)))
            .sum();
    }
    out
}

/// Sentence BLEU-4 scaled to [0, 100]. Orders 2..=4 use add-one smoothing
/// on both numerator and denominator; unigram precision is unsmoothed, so a
/// candidate without any unigram overlap scores 0.
pub fn bleu4<T: AsRef<str>>(candidate: &[T], reference: &[T]) -> f64 {
    if candidate.is_empty() || reference.is_empty() {
        log::warn!("bleu4 called with an empty token list; scoring 0");
        return 0.0;
    }
    let matches = ngram_matches(candidate, reference);
    if matches[0].matched == 0 {
        return 0.0;
    }
    let log_sum: f64 = matches
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let precision = if i == 0 {
                m.matched as f64 / m.total as f64
            } else {
                (m.matched as f64 + 1.0) / (m.total as f64 + 1.0)
            };
            precision.ln()
        })
        .sum();
    let c = candidate.len() as f64;
    let r = reference.len() as f64;
    let brevity = if c > r { 1.0 } else { (1.0 - r / c).exp() };
    100.0 * brevity * (log_sum / 4.0).exp()
}
