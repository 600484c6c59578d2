mod commands;
mod config;
mod exit;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use astnit::corpus::Split;
use astnit::{ReprKind, TokenizerKind, GRAMMAR_VERSION};
use clap::{Args, Parser, Subcommand};

use crate::config::Config;
use crate::exit::{Exit, OrExit};

#[derive(Debug, Parser)]
#[command(
    name = "astnit",
    version,
    about = "Serialize Python ASTs for code summarization and evaluate summaries"
)]
struct Cli {
    /// Print machine-readable JSON instead of tables.
    #[arg(long, global = true)]
    json: bool,
    /// TOML settings file; explicit flags take precedence over it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Token counting scheme for lengths and statistics.
    #[arg(long, global = true)]
    tokenizer: Option<TokenizerKind>,
    /// Relabel/whitelist/fold rule file replacing the built-in rules.
    #[arg(long, global = true, value_name = "FILE")]
    rules: Option<PathBuf>,
    /// Print the pinned grammar version and exit.
    #[arg(long)]
    grammar_version: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Serialize one Python file (or stdin) as a single line.
    Serialize {
        /// Output representation [default: nit].
        #[arg(long)]
        kind: Option<ReprKind>,
        /// Source file; `-` or absent reads stdin.
        input: Option<PathBuf>,
    },
    /// Filter and deduplicate a JSON-lines corpus.
    Prepare(PrepareArgs),
    /// Per-split sample counts and code/summary length statistics.
    Stats(CorpusArgs),
    /// Average serialized length per representation.
    Compare(CorpusArgs),
    /// Score candidate summaries against references.
    Eval(EvalArgs),
}

/// A corpus file, optionally prefixed with its split as `SPLIT=PATH`.
#[derive(Debug, Clone)]
struct InputSpec {
    split: Option<Split>,
    path: PathBuf,
}

impl FromStr for InputSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some((prefix, path)) = s.split_once('=') {
            if let Ok(split) = prefix.parse() {
                return Ok(InputSpec {
                    split: Some(split),
                    path: path.into(),
                });
            }
        }
        Ok(InputSpec {
            split: None,
            path: s.into(),
        })
    }
}

#[derive(Debug, Args)]
struct CorpusArgs {
    /// JSON-lines corpus files, each optionally written `SPLIT=PATH`.
    #[arg(required = true)]
    inputs: Vec<InputSpec>,
    /// Split for inputs without a prefix and lines without a split field.
    #[arg(long, default_value = "train")]
    split: Split,
    /// JSON field holding the source code [default: code].
    #[arg(long)]
    code_field: Option<String>,
    /// JSON field holding the summary [default: docstring].
    #[arg(long)]
    summary_field: Option<String>,
}

#[derive(Debug, Args)]
struct PrepareArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Kept samples, one JSON object per line.
    #[arg(long, short)]
    output: PathBuf,
    /// Rejected samples as `{"id", "reason"}` lines.
    #[arg(long)]
    rejections: Option<PathBuf>,
    /// Also write nit/sbt/preorder/code training pairs into this directory.
    #[arg(long)]
    export_dir: Option<PathBuf>,
    /// Prompt template file containing an `{input}` placeholder.
    #[arg(long)]
    template: Option<PathBuf>,
    /// Draw this many samples from each input before filtering.
    #[arg(long)]
    sample: Option<usize>,
    /// Seed for `--sample` [default: 0].
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// JSON lines with candidates, or with both candidates and references.
    candidates: PathBuf,
    /// JSON lines with references, matched to candidates by id.
    references: Option<PathBuf>,
    #[arg(long, default_value = "id")]
    id_field: String,
    #[arg(long, default_value = "candidate")]
    candidate_field: String,
    #[arg(long, default_value = "reference")]
    reference_field: String,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            failure.exit.into()
        }
    }
}

fn run(cli: Cli) -> exit::CmdResult {
    if cli.grammar_version {
        println!("{GRAMMAR_VERSION}");
        return Ok(());
    }
    let config = match &cli.config {
        Some(path) => Config::load(path).or_exit(Exit::Input)?,
        None => Config::default(),
    };
    let settings = commands::Settings::resolve(&cli, &config)?;
    match cli.command {
        Some(Command::Serialize { kind, input }) => {
            commands::serialize(&settings, &config, kind, input)
        }
        Some(Command::Prepare(args)) => commands::prepare(&settings, &config, args),
        Some(Command::Stats(args)) => commands::stats(&settings, &config, args),
        Some(Command::Compare(args)) => commands::compare(&settings, &config, args),
        Some(Command::Eval(args)) => commands::eval(&settings, args),
        None => exit::fail(Exit::Input, "no command given (see --help)"),
    }
}
