//! Corpus preparation: loading JSON-lines samples, method-level filtering,
//! deduplication, length statistics, representation length comparison and
//! training-pair export.

mod compare;
mod export;
mod filter;
mod sample;
mod stats;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use compare::{
    compare_lengths, CompareError, CompareReport, KindLength, Reduction, SampleLengths,
};
pub use export::{
    export_training, ExportFailure, PromptTemplate, TemplateError, TrainingPair, INPUT_PLACEHOLDER,
};
pub use filter::{dedup, dedup_key, first_sentence, prepare, MethodHeuristics, MethodInfo};
pub use sample::{
    load_corpus, CorpusFields, CorpusReader, RejectReason, Sample, SampleStatus, Split,
};
pub use stats::{corpus_stats, CorpusStats, LengthStats, SplitStats};

/// Deterministic subset of `n` items for a given seed, in original order.
/// Returns everything when `n` is at least the input length.
pub fn seeded_subset<T>(items: Vec<T>, n: usize, seed: u64) -> Vec<T> {
    if n >= items.len() {
        return items;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, items.len(), n).into_vec();
    picked.sort_unstable();
    let mut picked = picked.into_iter().peekable();
    items
        .into_iter()
        .enumerate()
        .filter_map(|(i, item)| {
            if picked.peek() == Some(&i) {
                picked.next();
                Some(item)
            } else {
                None
            }
        })
        .collect()
}
