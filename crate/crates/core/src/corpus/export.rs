use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use super::sample::Sample;
use crate::augment::RelabelRuleSet;
use crate::serialize::{render, ReprKind};

pub const INPUT_PLACEHOLDER: &str = "{input}";

#[derive(Debug, Error, PartialEq, Eq)]
#[error("template has no {INPUT_PLACEHOLDER} placeholder")]
pub struct TemplateError;

/// Instruction text wrapped around every serialized input. The same template
/// is used for all representations so only the input differs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    text: String,
}

impl PromptTemplate {
    pub fn new(text: impl Into<String>) -> Result<Self, TemplateError> {
        let text = text.into();
        if !text.contains(INPUT_PLACEHOLDER) {
            return Err(TemplateError);
        }
        Ok(PromptTemplate { text })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn fill(&self, input: &str) -> String {
        self.text.replace(INPUT_PLACEHOLDER, input)
    }
}

impl Default for PromptTemplate {
    fn default() -> Self {
        PromptTemplate {
            text: "Summarize the following input in one sentence.\n\n{input}\n\nSummary:".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrainingPair {
    pub id: String,
    pub input: String,
    pub output: String,
    pub repr: ReprKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExportFailure {
    pub id: String,
    pub error: String,
}

/// Build prompt/target pairs for kept samples in input order. Samples whose
/// representation cannot be rendered are skipped, logged and returned
/// separately.
pub fn export_training(
    samples: &[Sample],
    kind: ReprKind,
    template: &PromptTemplate,
    rules: &RelabelRuleSet,
) -> (Vec<TrainingPair>, Vec<ExportFailure>) {
    let results: Vec<Result<TrainingPair, ExportFailure>> = samples
        .par_iter()
        .filter(|s| s.is_kept())
        .map(|s| match render(kind, &s.code, rules) {
            Ok(text) => Ok(TrainingPair {
                id: s.id.clone(),
                input: template.fill(&text),
                output: s.summary.clone(),
                repr: kind,
            }),
            Err(e) => Err(ExportFailure {
                id: s.id.clone(),
                error: e.to_string(),
            }),
        })
        .collect();
    let mut pairs = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for result in results {
        match result {
            Ok(pair) => pairs.push(pair),
            Err(failure) => {
                log::warn!("skipping {} for {kind}: {}", failure.id, failure.error);
                failures.push(failure);
            }
        }
    }
    (pairs, failures)
}
