use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Valid, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "valid" | "validation" | "dev" => Ok(Split::Valid),
            "test" => Ok(Split::Test),
            other => Err(format!(
                "unknown split {other:?} (expected train, valid or test)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    Malformed,
    Constructor,
    Accessor,
    TestCase,
    ShortSummary,
    ParseFailure,
    Duplicate,
}

impl RejectReason {
    pub const ALL: [RejectReason; 7] = [
        RejectReason::Malformed,
        RejectReason::Constructor,
        RejectReason::Accessor,
        RejectReason::TestCase,
        RejectReason::ShortSummary,
        RejectReason::ParseFailure,
        RejectReason::Duplicate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::Malformed => "malformed",
            RejectReason::Constructor => "constructor",
            RejectReason::Accessor => "accessor",
            RejectReason::TestCase => "test-case",
            RejectReason::ShortSummary => "short-summary",
            RejectReason::ParseFailure => "parse-failure",
            RejectReason::Duplicate => "duplicate",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleStatus {
    Kept,
    Rejected(RejectReason),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    pub id: String,
    pub code: String,
    pub summary: String,
    pub split: Split,
    pub status: SampleStatus,
}

impl Sample {
    pub fn new(
        id: impl Into<String>,
        code: impl Into<String>,
        summary: impl Into<String>,
        split: Split,
    ) -> Self {
        Sample {
            id: id.into(),
            code: code.into(),
            summary: summary.into(),
            split,
            status: SampleStatus::Kept,
        }
    }

    pub fn is_kept(&self) -> bool {
        self.status == SampleStatus::Kept
    }

    pub fn reject(&mut self, reason: RejectReason) {
        self.status = SampleStatus::Rejected(reason);
    }

    pub fn reason(&self) -> Option<RejectReason> {
        match self.status {
            SampleStatus::Kept => None,
            SampleStatus::Rejected(reason) => Some(reason),
        }
    }
}

/// JSON field names for code and summary, plus optional fields for an
/// explicit id and a per-line split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusFields {
    pub code: String,
    pub summary: String,
    pub id: String,
    pub split: String,
}

impl Default for CorpusFields {
    fn default() -> Self {
        CorpusFields {
            code: "code".into(),
            summary: "docstring".into(),
            id: "id".into(),
            split: "split".into(),
        }
    }
}

/// Streams samples from a JSON-lines corpus in file order. Lines that are
/// not objects with string code and summary fields come back rejected as
/// `malformed`. Blank lines are skipped.
pub struct CorpusReader<R> {
    lines: io::Lines<R>,
    line_no: usize,
    split: Split,
    fields: CorpusFields,
}

impl<R: BufRead> CorpusReader<R> {
    pub fn new(reader: R, split: Split, fields: CorpusFields) -> Self {
        CorpusReader {
            lines: reader.lines(),
            line_no: 0,
            split,
            fields,
        }
    }

    fn sample_from_line(&self, line: &str) -> Sample {
        let value: Option<Value> = serde_json::from_str(line).ok();
        let object = value.as_ref().and_then(Value::as_object);
        let text = |name: &str| object.and_then(|o| o.get(name)).and_then(Value::as_str);
        let split = text(&self.fields.split)
            .and_then(|s| s.parse().ok())
            .unwrap_or(self.split);
        let id =
            text(&self.fields.id).map_or_else(|| format!("{split}-{}", self.line_no), String::from);
        match (text(&self.fields.code), text(&self.fields.summary)) {
            (Some(code), Some(summary)) => Sample::new(id, code, summary, split),
            _ => {
                let mut sample = Sample::new(id, "", "", split);
                sample.reject(RejectReason::Malformed);
                sample
            }
        }
    }
}

impl<R: BufRead> Iterator for CorpusReader<R> {
    type Item = io::Result<Sample>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(line) => line,
                Err(e) if e.kind() == io::ErrorKind::InvalidData => {
                    self.line_no += 1;
                    let mut sample = Sample::new(
                        format!("{}-{}", self.split, self.line_no),
                        "",
                        "",
                        self.split,
                    );
                    sample.reject(RejectReason::Malformed);
                    return Some(Ok(sample));
                }
                Err(e) => return Some(Err(e)),
            };
            self.line_no += 1;
            if line.trim().is_empty() {
                continue;
            }
            return Some(Ok(self.sample_from_line(&line)));
        }
    }
}

pub fn load_corpus(
    path: impl AsRef<Path>,
    split: Split,
    fields: CorpusFields,
) -> io::Result<CorpusReader<BufReader<File>>> {
    Ok(CorpusReader::new(
        BufReader::new(File::open(path)?),
        split,
        fields,
    ))
}
