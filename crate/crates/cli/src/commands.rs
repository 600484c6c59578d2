use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use astnit::augment::AugmentError;
use astnit::corpus::{
    compare_lengths, corpus_stats, export_training, load_corpus, prepare as prepare_samples,
    seeded_subset, CompareError, CorpusFields, LengthStats, MethodHeuristics, PromptTemplate,
    RejectReason, Sample,
};
use astnit::metrics::{evaluate_corpus, MetricError};
use astnit::serialize::{render, RenderError};
use astnit::{RelabelRuleSet, ReprKind, SerializedSequence, TokenizerKind, GRAMMAR_VERSION};
use serde::Serialize;
use serde_json::Value;

use crate::config::Config;
use crate::exit::{fail, CmdResult, Exit, Failure, OrExit};
use crate::{Cli, CorpusArgs, EvalArgs, PrepareArgs};

/// Options shared by every command after merging flags, config and defaults.
pub struct Settings {
    pub json: bool,
    pub tokenizer: TokenizerKind,
    pub rules: RelabelRuleSet,
}

impl Settings {
    pub fn resolve(cli: &Cli, config: &Config) -> CmdResult<Self> {
        let rules = match cli.rules.as_ref().or(config.rules.as_ref()) {
            Some(path) => RelabelRuleSet::from_file(path).map_err(|e| {
                let exit = match e {
                    astnit::augment::RuleFileError::Io(_) => Exit::Io,
                    astnit::augment::RuleFileError::Parse(_) => Exit::Input,
                };
                Failure::new(
                    exit,
                    anyhow::Error::new(e).context(path.display().to_string()),
                )
            })?,
            None => RelabelRuleSet::default(),
        };
        Ok(Settings {
            json: cli.json || config.json.unwrap_or(false),
            tokenizer: cli.tokenizer.unwrap_or_else(|| config.tokenizer()),
            rules,
        })
    }
}

/// Pretty JSON with the grammar version added as a top-level field.
fn print_json(value: &impl Serialize) -> CmdResult {
    #[derive(Serialize)]
    struct Tagged<'a, T> {
        grammar_version: &'static str,
        #[serde(flatten)]
        body: &'a T,
    }
    let tagged = Tagged {
        grammar_version: GRAMMAR_VERSION,
        body: value,
    };
    let text = serde_json::to_string_pretty(&tagged).or_exit(Exit::Io)?;
    println!("{text}");
    Ok(())
}

/// Left-aligned first column, right-aligned numeric columns.
fn print_table(header: &[&str], rows: &[Vec<String>]) {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if i == 0 {
                    format!("{c:<w$}", w = widths[i])
                } else {
                    format!("{c:>w$}", w = widths[i])
                }
            })
            .collect::<Vec<_>>()
            .join("  ")
    };
    println!("{}", line(header.to_vec()));
    println!(
        "{}",
        widths
            .iter()
            .map(|w| "-".repeat(*w))
            .collect::<Vec<_>>()
            .join("  ")
    );
    for row in rows {
        println!("{}", line(row.iter().map(String::as_str).collect()));
    }
}

fn read_source(input: Option<&Path>) -> CmdResult<(String, String)> {
    let (name, bytes) = match input {
        None => ("<stdin>".to_string(), read_stdin()?),
        Some(p) if p == Path::new("-") => ("<stdin>".to_string(), read_stdin()?),
        Some(p) => (
            p.display().to_string(),
            std::fs::read(p)
                .with_context(|| format!("cannot read {}", p.display()))
                .or_exit(Exit::Io)?,
        ),
    };
    let text = String::from_utf8(bytes)
        .with_context(|| format!("{name} is not valid UTF-8"))
        .or_exit(Exit::Input)?;
    Ok((name, text))
}

fn read_stdin() -> CmdResult<Vec<u8>> {
    let mut bytes = Vec::new();
    io::stdin()
        .read_to_end(&mut bytes)
        .context("cannot read stdin")
        .or_exit(Exit::Io)?;
    Ok(bytes)
}

/// 1-based line and column of a byte offset.
fn line_col(source: &str, offset: usize) -> (usize, usize) {
    let before = &source[..offset.min(source.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

fn create(path: &Path) -> CmdResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("cannot create {}", dir.display()))
            .or_exit(Exit::Io)?;
    }
    let file = File::create(path)
        .with_context(|| format!("cannot create {}", path.display()))
        .or_exit(Exit::Io)?;
    Ok(BufWriter::new(file))
}

fn write_jsonl<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> CmdResult<usize> {
    let mut out = create(path)?;
    let mut n = 0;
    for item in items {
        serde_json::to_writer(&mut out, &item).or_exit(Exit::Io)?;
        out.write_all(b"\n")
            .with_context(|| format!("cannot write {}", path.display()))
            .or_exit(Exit::Io)?;
        n += 1;
    }
    out.flush()
        .with_context(|| format!("cannot write {}", path.display()))
        .or_exit(Exit::Io)?;
    Ok(n)
}

pub fn serialize(
    settings: &Settings,
    config: &Config,
    kind: Option<ReprKind>,
    input: Option<PathBuf>,
) -> CmdResult {
    let kind = kind
        .or_else(|| config.kind.as_deref().and_then(|k| k.parse().ok()))
        .unwrap_or(ReprKind::Nit);
    let (name, source) = read_source(input.as_deref())?;
    let text = match render(kind, &source, &settings.rules) {
        Ok(text) => text,
        Err(RenderError::Augment(AugmentError::ErrorTree(span))) => {
            let (line, col) = line_col(&source, span.start);
            return fail(
                Exit::Input,
                format!(
                    "{name}: syntax error node at bytes {}..{} (line {line}, column {col})",
                    span.start, span.end
                ),
            );
        }
        Err(e) => {
            return Err(Failure::new(
                Exit::Input,
                anyhow::Error::new(e).context(name),
            ))
        }
    };
    if settings.json {
        #[derive(Serialize)]
        struct Out<'a> {
            #[serde(flatten)]
            sequence: SerializedSequence,
            tokenizer: &'a str,
        }
        print_json(&Out {
            sequence: SerializedSequence::new(kind, text, &settings.tokenizer),
            tokenizer: settings.tokenizer.to_string().as_str(),
        })
    } else {
        println!("{text}");
        Ok(())
    }
}

fn corpus_fields(args: &CorpusArgs, config: &Config) -> CorpusFields {
    let defaults = CorpusFields::default();
    CorpusFields {
        code: args
            .code_field
            .clone()
            .or_else(|| config.code_field.clone())
            .unwrap_or(defaults.code),
        summary: args
            .summary_field
            .clone()
            .or_else(|| config.summary_field.clone())
            .unwrap_or(defaults.summary),
        ..defaults
    }
}

/// Load every input in order; `sample` draws a seeded subset per input.
fn load_inputs(
    args: &CorpusArgs,
    config: &Config,
    sample: Option<(usize, u64)>,
) -> CmdResult<Vec<Sample>> {
    let fields = corpus_fields(args, config);
    let mut samples = Vec::new();
    for input in &args.inputs {
        let split = input.split.unwrap_or(args.split);
        let reader = load_corpus(&input.path, split, fields.clone())
            .with_context(|| format!("cannot open {}", input.path.display()))
            .or_exit(Exit::Io)?;
        let loaded = reader
            .collect::<io::Result<Vec<_>>>()
            .with_context(|| format!("cannot read {}", input.path.display()))
            .or_exit(Exit::Io)?;
        samples.extend(match sample {
            Some((n, seed)) => seeded_subset(loaded, n, seed),
            None => loaded,
        });
    }
    Ok(samples)
}

fn kept_only(samples: Vec<Sample>) -> Vec<Sample> {
    let total = samples.len();
    let kept: Vec<Sample> = samples.into_iter().filter(Sample::is_kept).collect();
    if kept.len() < total {
        log::warn!("ignoring {} malformed lines", total - kept.len());
    }
    kept
}

#[derive(Serialize)]
struct PreparedRow<'a> {
    id: &'a str,
    split: astnit::corpus::Split,
    code: &'a str,
    docstring: &'a str,
}

#[derive(Serialize)]
struct RejectionRow<'a> {
    id: &'a str,
    reason: RejectReason,
}

#[derive(Serialize)]
struct PrepareSummary {
    input: usize,
    kept: usize,
    rejected: usize,
    reasons: BTreeMap<&'static str, usize>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    exported: BTreeMap<ReprKind, usize>,
}

pub fn prepare(settings: &Settings, config: &Config, args: PrepareArgs) -> CmdResult {
    let seed = args.seed.or(config.seed).unwrap_or(0);
    let template = match args.template.as_ref() {
        Some(path) => Some(
            std::fs::read_to_string(path)
                .with_context(|| format!("cannot read template {}", path.display()))
                .or_exit(Exit::Io)?,
        ),
        None => config.template.clone(),
    }
    .map(PromptTemplate::new)
    .transpose()
    .or_exit(Exit::Input)?
    .unwrap_or_default();
    let mut heuristics = MethodHeuristics::default();
    if let Some(words) = config.min_summary_words {
        heuristics.min_summary_words = words;
    }

    let samples = load_inputs(&args.corpus, config, args.sample.map(|n| (n, seed)))?;
    let input = samples.len();
    let samples = prepare_samples(samples, &heuristics);

    let kept: Vec<&Sample> = samples.iter().filter(|s| s.is_kept()).collect();
    write_jsonl(
        &args.output,
        kept.iter().map(|s| PreparedRow {
            id: &s.id,
            split: s.split,
            code: &s.code,
            docstring: &s.summary,
        }),
    )?;
    if let Some(path) = &args.rejections {
        write_jsonl(
            path,
            samples
                .iter()
                .filter_map(|s| s.reason().map(|reason| RejectionRow { id: &s.id, reason })),
        )?;
    }

    let mut reasons: BTreeMap<&'static str, usize> =
        RejectReason::ALL.iter().map(|r| (r.as_str(), 0)).collect();
    for reason in samples.iter().filter_map(Sample::reason) {
        *reasons.entry(reason.as_str()).or_default() += 1;
    }
    let mut exported = BTreeMap::new();
    if let Some(dir) = &args.export_dir {
        for kind in ReprKind::ALL {
            let (pairs, _failures) = export_training(&samples, kind, &template, &settings.rules);
            let n = write_jsonl(&dir.join(format!("{kind}.jsonl")), &pairs)?;
            exported.insert(kind, n);
        }
    }

    let summary = PrepareSummary {
        input,
        kept: kept.len(),
        rejected: input - kept.len(),
        reasons,
        exported,
    };
    if settings.json {
        return print_json(&summary);
    }
    let detail = RejectReason::ALL
        .iter()
        .map(|r| format!("{r} {}", summary.reasons[r.as_str()]))
        .collect::<Vec<_>>()
        .join(", ");
    println!(
        "kept {} of {}; rejected {} ({detail})",
        summary.kept, summary.input, summary.rejected
    );
    Ok(())
}

pub fn stats(settings: &Settings, config: &Config, args: CorpusArgs) -> CmdResult {
    let samples = kept_only(load_inputs(&args, config, None)?);
    let stats = corpus_stats(&samples, &settings.tokenizer);
    if settings.json {
        return print_json(&stats);
    }
    let cells = |s: &Option<LengthStats>| match s {
        Some(s) => vec![
            s.min.to_string(),
            format!("{:.2}", s.mean),
            s.max.to_string(),
        ],
        None => vec!["-".into(), "-".into(), "-".into()],
    };
    let rows: Vec<Vec<String>> = stats
        .splits
        .iter()
        .map(|s| {
            let mut row = vec![s.split.to_string(), s.count.to_string()];
            row.extend(cells(&s.code));
            row.extend(cells(&s.summary));
            row
        })
        .collect();
    println!("grammar: {GRAMMAR_VERSION}; tokenizer: {}", stats.tokenizer);
    print_table(
        &[
            "Split",
            "Count",
            "Code Min",
            "Code Mean",
            "Code Max",
            "Summary Min",
            "Summary Mean",
            "Summary Max",
        ],
        &rows,
    );
    Ok(())
}

pub fn compare(settings: &Settings, config: &Config, args: CorpusArgs) -> CmdResult {
    let samples = kept_only(load_inputs(&args, config, None)?);
    let report = match compare_lengths(&samples, &settings.tokenizer, &settings.rules) {
        Ok(report) => report,
        Err(e @ CompareError::Empty) => return Err(Failure::new(Exit::Input, e)),
    };
    if settings.json {
        return print_json(&report);
    }
    let rows: Vec<Vec<String>> = report
        .kinds
        .iter()
        .map(|k| {
            vec![
                k.title.to_string(),
                k.count.to_string(),
                format!("{:.2}", k.average),
                k.total.to_string(),
            ]
        })
        .collect();
    println!(
        "grammar: {GRAMMAR_VERSION}; tokenizer: {}",
        report.tokenizer
    );
    print_table(
        &["Input", "Samples", "Avg Length (tokens)", "Total Tokens"],
        &rows,
    );
    println!();
    println!("NIT vs SBT reduction: {:.2}%", report.nit_vs_sbt);
    println!(
        "NIT shorter than SBT on {:.2}% of samples",
        100.0 * report.nit_shorter_share
    );
    if !report.skipped.is_empty() {
        println!(
            "skipped {} samples that failed to serialize",
            report.skipped.len()
        );
    }
    Ok(())
}

struct EvalRecord {
    id: String,
    candidate: Option<String>,
    reference: Option<String>,
}

fn read_eval_records(path: &Path, args: &EvalArgs) -> CmdResult<Vec<EvalRecord>> {
    let file = File::open(path)
        .with_context(|| format!("cannot open {}", path.display()))
        .or_exit(Exit::Io)?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line
            .with_context(|| format!("cannot read {}", path.display()))
            .or_exit(Exit::Io)?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&line)
            .with_context(|| format!("{}:{}: invalid JSON", path.display(), i + 1))
            .or_exit(Exit::Input)?;
        let text = |name: &str| value.get(name).and_then(Value::as_str).map(String::from);
        let id = match value.get(&args.id_field) {
            Some(Value::String(s)) => s.clone(),
            Some(Value::Number(n)) => n.to_string(),
            _ => (i + 1).to_string(),
        };
        records.push(EvalRecord {
            id,
            candidate: text(&args.candidate_field),
            reference: text(&args.reference_field),
        });
    }
    Ok(records)
}

fn require(value: Option<String>, field: &str, path: &Path, id: &str) -> CmdResult<String> {
    match value {
        Some(v) => Ok(v),
        None => fail(
            Exit::Input,
            format!(
                "{}: record {id:?} has no string field {field:?}",
                path.display()
            ),
        ),
    }
}

pub fn eval(settings: &Settings, args: EvalArgs) -> CmdResult {
    let cand_records = read_eval_records(&args.candidates, &args)?;
    let mut ids = Vec::with_capacity(cand_records.len());
    let mut candidates = Vec::with_capacity(cand_records.len());
    let mut references = Vec::with_capacity(cand_records.len());
    let mut seen = HashSet::new();
    for record in &cand_records {
        if !seen.insert(record.id.clone()) {
            return fail(
                Exit::Contract,
                format!(
                    "duplicate id {:?} in {}",
                    record.id,
                    args.candidates.display()
                ),
            );
        }
    }
    match &args.references {
        None => {
            for r in cand_records {
                candidates.push(require(
                    r.candidate,
                    &args.candidate_field,
                    &args.candidates,
                    &r.id,
                )?);
                references.push(require(
                    r.reference,
                    &args.reference_field,
                    &args.candidates,
                    &r.id,
                )?);
                ids.push(r.id);
            }
        }
        Some(ref_path) => {
            let ref_records = read_eval_records(ref_path, &args)?;
            if ref_records.len() != cand_records.len() {
                return fail(
                    Exit::Contract,
                    MetricError::LengthMismatch {
                        candidates: cand_records.len(),
                        references: ref_records.len(),
                    },
                );
            }
            let mut by_id: HashMap<String, Option<String>> = HashMap::new();
            for r in ref_records {
                if by_id.insert(r.id.clone(), r.reference).is_some() {
                    return fail(
                        Exit::Contract,
                        format!("duplicate id {:?} in {}", r.id, ref_path.display()),
                    );
                }
            }
            for r in cand_records {
                let Some(reference) = by_id.remove(&r.id) else {
                    return fail(
                        Exit::Contract,
                        format!("id {:?} has no reference in {}", r.id, ref_path.display()),
                    );
                };
                candidates.push(require(
                    r.candidate,
                    &args.candidate_field,
                    &args.candidates,
                    &r.id,
                )?);
                references.push(require(reference, &args.reference_field, ref_path, &r.id)?);
                ids.push(r.id);
            }
        }
    }
    let report = evaluate_corpus(&ids, &candidates, &references).or_exit(Exit::Contract)?;
    if settings.json {
        return print_json(&report);
    }
    print_table(
        &["Metric", "Score"],
        &[
            vec!["BLEU-4".into(), format!("{:.2}", report.bleu4)],
            vec!["METEOR".into(), format!("{:.4}", report.meteor)],
            vec!["ROUGE-L".into(), format!("{:.4}", report.rouge_l)],
        ],
    );
    println!("samples: {}", report.per_sample.len());
    Ok(())
}
