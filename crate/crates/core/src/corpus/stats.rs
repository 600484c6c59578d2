use serde::Serialize;

use super::sample::{Sample, Split};
use crate::tokenize::Tokenizer;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LengthStats {
    pub min: usize,
    pub mean: f64,
    pub max: usize,
}

impl LengthStats {
    /// `None` for an empty sequence of lengths.
    pub fn from_lengths(lengths: impl IntoIterator<Item = usize>) -> Option<Self> {
        let mut n = 0usize;
        let mut sum = 0usize;
        let mut min = usize::MAX;
        let mut max = 0;
        for len in lengths {
            n += 1;
            sum += len;
            min = min.min(len);
            max = max.max(len);
        }
        (n > 0).then(|| LengthStats {
            min,
            mean: sum as f64 / n as f64,
            max,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitStats {
    pub split: Split,
    pub count: usize,
    pub code: Option<LengthStats>,
    pub summary: Option<LengthStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub tokenizer: String,
    pub splits: Vec<SplitStats>,
}

impl CorpusStats {
    pub fn split(&self, split: Split) -> &SplitStats {
        self.splits
            .iter()
            .find(|s| s.split == split)
            .expect("every split is reported")
    }
}

/// Per-split counts and code/summary length statistics over kept samples.
pub fn corpus_stats(samples: &[Sample], tokenizer: &dyn Tokenizer) -> CorpusStats {
    let splits = Split::ALL
        .into_iter()
        .map(|split| {
            let kept: Vec<&Sample> = samples
                .iter()
                .filter(|s| s.split == split && s.is_kept())
                .collect();
            SplitStats {
                split,
                count: kept.len(),
                code: LengthStats::from_lengths(kept.iter().map(|s| tokenizer.count(&s.code))),
                summary: LengthStats::from_lengths(
                    kept.iter().map(|s| tokenizer.count(&s.summary)),
                ),
            }
        })
        .collect();
    CorpusStats {
        tokenizer: tokenizer.name().to_string(),
        splits,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::sample::RejectReason;
    use crate::tokenize::TokenizerKind;

    #[test]
    fn per_split_numbers() {
        let mut rejected = Sample::new("r", "a b c d e f g", "x", Split::Train);
        rejected.reject(RejectReason::Duplicate);
        let samples = vec![
            Sample::new("1", "a b", "one two three four", Split::Train),
            Sample::new("2", "a b c d", "one two three four five six", Split::Train),
            Sample::new("3", "x", "one two three four", Split::Test),
            rejected,
        ];
        let stats = corpus_stats(&samples, &TokenizerKind::Whitespace);
        let train = stats.split(Split::Train);
        assert_eq!(train.count, 2);
        assert_eq!(
            train.code,
            Some(LengthStats {
                min: 2,
                mean: 3.0,
                max: 4
            })
        );
        assert_eq!(
            train.summary,
            Some(LengthStats {
                min: 4,
                mean: 5.0,
                max: 6
            })
        );
        let valid = stats.split(Split::Valid);
        assert_eq!(valid.count, 0);
        assert!(valid.code.is_none() && valid.summary.is_none());
        assert_eq!(stats.split(Split::Test).code.as_ref().unwrap().max, 1);
    }

    #[test]
    fn tokenizer_is_pluggable() {
        let samples = vec![Sample::new("1", "ab c", "xyz", Split::Valid)];
        let stats = corpus_stats(&samples, &TokenizerKind::Chars);
        assert_eq!(stats.tokenizer, "chars");
        assert_eq!(stats.split(Split::Valid).code.as_ref().unwrap().min, 4);
    }
}
