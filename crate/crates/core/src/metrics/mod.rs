//! Summary quality metrics: smoothed sentence BLEU-4, METEOR (exact and
//! stem stages) and ROUGE-L F1.

mod bleu;
mod meteor;
mod rouge;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bleu::{bleu4, ngram_matches, NgramMatch};
pub use meteor::{meteor, meteor_alignment, Alignment};
pub use rouge::{lcs_len, rouge_l};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("{candidates} candidates but {references} references")]
    LengthMismatch {
        candidates: usize,
        references: usize,
    },
    #[error("{ids} ids for {pairs} pairs")]
    IdMismatch { ids: usize, pairs: usize },
}

/// Lowercase and split on whitespace, separating punctuation into its own
/// tokens. Applied identically to candidates and references.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for word in text.split_whitespace() {
        let mut current = String::new();
        for c in word.chars() {
            if c.is_alphanumeric() || c == '_' {
                current.extend(c.to_lowercase());
            } else {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
                tokens.push(c.to_string());
            }
        }
        if !current.is_empty() {
            tokens.push(current);
        }
    }
    tokens
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleScore {
    pub id: String,
    pub bleu4: f64,
    pub meteor: f64,
    pub rouge_l: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub bleu4: f64,
    pub meteor: f64,
    pub rouge_l: f64,
    pub per_sample: Vec<SampleScore>,
}

pub fn score_pair(id: &str, candidate: &str, reference: &str) -> SampleScore {
    let cand = tokenize(candidate);
    let refs = tokenize(reference);
    SampleScore {
        id: id.to_string(),
        bleu4: bleu4(&cand, &refs),
        meteor: meteor(&cand, &refs),
        rouge_l: rouge_l(&cand, &refs),
    }
}

/// Per-sample scores and their arithmetic means, in input order.
pub fn evaluate_corpus<S: AsRef<str> + Sync>(
    ids: &[S],
    candidates: &[S],
    references: &[S],
) -> Result<MetricReport, MetricError> {
    use rayon::prelude::*;

    if candidates.len() != references.len() {
        return Err(MetricError::LengthMismatch {
            candidates: candidates.len(),
            references: references.len(),
        });
    }
    if ids.len() != candidates.len() {
        return Err(MetricError::IdMismatch {
            ids: ids.len(),
            pairs: candidates.len(),
        });
    }
    let per_sample: Vec<SampleScore> = (0..ids.len())
        .into_par_iter()
        .map(|i| {
            score_pair(
                ids[i].as_ref(),
                candidates[i].as_ref(),
                references[i].as_ref(),
            )
        })
        .collect();
    let mean = |f: fn(&SampleScore) -> f64| {
        if per_sample.is_empty() {
            0.0
        } else {
            per_sample.iter().map(f).sum::<f64>() / per_sample.len() as f64
        }
    };
    Ok(MetricReport {
        bleu4: mean(|s| s.bleu4),
        meteor: mean(|s| s.meteor),
        rouge_l: mean(|s| s.rouge_l),
        per_sample,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizer_splits_punctuation() {
        assert_eq!(
            tokenize("Create a virtual-env, in dir."),
            ["create", "a", "virtual", "-", "env", ",", "in", "dir", "."]
        );
        assert!(tokenize("   ").is_empty());
    }

    #[test]
    fn self_evaluation() {
        let refs = [
            "Removes the temporary file.",
            "Create a virtual environment in a directory.",
        ];
        let report = evaluate_corpus(&["a", "b"], &refs, &refs).unwrap();
        assert_eq!(report.bleu4, 100.0);
        assert_eq!(report.rouge_l, 1.0);
        // 5 and 8 tokens after punctuation splitting, one chunk each
        let expected = ((1.0 - 0.5 / 125.0) + (1.0 - 0.5 / 512.0)) / 2.0;
        assert!((report.meteor - expected).abs() < 1e-12);
    }

    #[test]
    fn single_pair_equals_pair_score() {
        let report = evaluate_corpus(
            &["x"],
            &["removes the temporary file"],
            &["clean up files in the specified path"],
        )
        .unwrap();
        let pair = &report.per_sample[0];
        assert_eq!(report.bleu4, pair.bleu4);
        assert_eq!(report.meteor, pair.meteor);
        assert_eq!(report.rouge_l, pair.rouge_l);
    }

    #[test]
    fn length_mismatch() {
        assert_eq!(
            evaluate_corpus(&["a"], &["x"], &["x", "y"]),
            Err(MetricError::LengthMismatch {
                candidates: 1,
                references: 2
            })
        );
        assert!(matches!(
            evaluate_corpus(&["a", "b"], &["x"], &["y"]),
            Err(MetricError::IdMismatch { .. })
        ));
    }
}
