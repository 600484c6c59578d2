use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use super::sample::Sample;
use crate::augment::RelabelRuleSet;
use crate::serialize::{render_all, ReprKind};
use crate::tokenize::Tokenizer;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CompareError {
    #[error("corpus has no samples that serialize under every representation")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KindLength {
    pub kind: ReprKind,
    pub title: &'static str,
    pub count: usize,
    pub total: usize,
    pub average: f64,
}

/// `100 * (1 - avg(from) / avg(to))`: how much shorter `from` is than `to`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reduction {
    pub from: ReprKind,
    pub to: ReprKind,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampleLengths {
    pub id: String,
    pub nit: usize,
    pub sbt: usize,
    pub preorder: usize,
    pub code: usize,
}

impl SampleLengths {
    pub fn get(&self, kind: ReprKind) -> usize {
        match kind {
            ReprKind::Nit => self.nit,
            ReprKind::Sbt => self.sbt,
            ReprKind::Preorder => self.preorder,
            ReprKind::Code => self.code,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub tokenizer: String,
    pub kinds: Vec<KindLength>,
    pub reductions: Vec<Reduction>,
    /// Reduction of NIT relative to SBT, in percent.
    pub nit_vs_sbt: f64,
    /// `avg(NIT) / avg(SBT)`.
    pub nit_sbt_ratio: f64,
    /// Share of samples whose NIT is strictly shorter than their SBT.
    pub nit_shorter_share: f64,
    /// Ids of samples that could not be serialized and were left out.
    pub skipped: Vec<String>,
    pub per_sample: Vec<SampleLengths>,
}

impl CompareReport {
    pub fn kind(&self, kind: ReprKind) -> &KindLength {
        self.kinds
            .iter()
            .find(|k| k.kind == kind)
            .expect("every kind is reported")
    }

    pub fn reduction(&self, from: ReprKind, to: ReprKind) -> Option<f64> {
        self.reductions
            .iter()
            .find(|r| r.from == from && r.to == to)
            .map(|r| r.percent)
    }
}

fn reduction(from: f64, to: f64) -> f64 {
    if to == 0.0 {
        0.0
    } else {
        100.0 * (1.0 - from / to)
    }
}

/// Serialize every kept sample under all four representations and summarize
/// their token lengths. Samples that fail to serialize under any kind are
/// left out of every kind so counts stay equal.
pub fn compare_lengths(
    samples: &[Sample],
    tokenizer: &dyn Tokenizer,
    rules: &RelabelRuleSet,
) -> Result<CompareReport, CompareError> {
    let results: Vec<Result<SampleLengths, String>> = samples
        .par_iter()
        .filter(|s| s.is_kept())
        .map(|s| match render_all(&s.code, rules) {
            Ok(r) => Ok(SampleLengths {
                id: s.id.clone(),
                nit: tokenizer.count(&r.nit),
                sbt: tokenizer.count(&r.sbt),
                preorder: tokenizer.count(&r.preorder),
                code: tokenizer.count(&r.code),
            }),
            Err(e) => {
                log::warn!("skipping {}: {e}", s.id);
                Err(s.id.clone())
            }
        })
        .collect();
    let mut per_sample = Vec::with_capacity(results.len());
    let mut skipped = Vec::new();
    for result in results {
        match result {
            Ok(lengths) => per_sample.push(lengths),
            Err(id) => skipped.push(id),
        }
    }
    if per_sample.is_empty() {
        return Err(CompareError::Empty);
    }

    let n = per_sample.len();
    let kinds: Vec<KindLength> = ReprKind::ALL
        .into_iter()
        .map(|kind| {
            let total: usize = per_sample.iter().map(|s| s.get(kind)).sum();
            KindLength {
                kind,
                title: kind.title(),
                count: n,
                total,
                average: total as f64 / n as f64,
            }
        })
        .collect();
    let mut reductions = Vec::new();
    for from in &kinds {
        for to in &kinds {
            if from.kind != to.kind {
                reductions.push(Reduction {
                    from: from.kind,
                    to: to.kind,
                    percent: reduction(from.average, to.average),
                });
            }
        }
    }
    let avg = |kind: ReprKind| kinds.iter().find(|k| k.kind == kind).unwrap().average;
    let (nit, sbt) = (avg(ReprKind::Nit), avg(ReprKind::Sbt));
    let shorter = per_sample.iter().filter(|s| s.nit < s.sbt).count();
    Ok(CompareReport {
        tokenizer: tokenizer.name().to_string(),
        nit_vs_sbt: reduction(nit, sbt),
        nit_sbt_ratio: if sbt == 0.0 { 0.0 } else { nit / sbt },
        nit_shorter_share: shorter as f64 / n as f64,
        kinds,
        reductions,
        skipped,
        per_sample,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::sample::Split;
    use crate::serialize::render;
    use crate::tokenize::TokenizerKind;

    fn corpus() -> Vec<Sample> {
        vec![
            Sample::new("a", crate::BALANCE_CHECK, "s", Split::Train),
            Sample::new("b", "def f():\n    return x + 1\n", "s", Split::Train),
            Sample::new("broken", "def f(:\n", "s", Split::Train),
        ]
    }

    #[test]
    fn totals_are_sums_of_single_renders() {
        let rules = RelabelRuleSet::default();
        let tok = TokenizerKind::Whitespace;
        let report = compare_lengths(&corpus(), &tok, &rules).unwrap();
        assert_eq!(report.skipped, ["broken"]);
        for kind in ReprKind::ALL {
            let expected: usize = corpus()[..2]
                .iter()
                .map(|s| tok.count(&render(kind, &s.code, &rules).unwrap()))
                .sum();
            assert_eq!(report.kind(kind).total, expected);
            assert_eq!(report.kind(kind).count, 2);
        }
        let nit = report.kind(ReprKind::Nit).average;
        let sbt = report.kind(ReprKind::Sbt).average;
        assert!((report.nit_vs_sbt - 100.0 * (1.0 - nit / sbt)).abs() < 1e-12);
        assert_eq!(
            report.reduction(ReprKind::Nit, ReprKind::Sbt),
            Some(report.nit_vs_sbt)
        );
        assert_eq!(report.reductions.len(), 12);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        let rules = RelabelRuleSet::default();
        assert_eq!(
            compare_lengths(&[], &TokenizerKind::Whitespace, &rules),
            Err(CompareError::Empty)
        );
    }
}
