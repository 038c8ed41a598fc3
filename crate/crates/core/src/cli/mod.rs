//! Command-line surface: argument parsing, configuration precedence, run
//! manifests and exit codes. The `evkit` binary only calls [`main`].

mod commands;
mod config;
mod manifest;
mod overlap;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use commands::{run, Outcome};
pub use config::{pick, BackendSection, FileConfig, ResolvedBackend, ResolvedConfig};
pub use manifest::{manifest_path, FileDigest, RunManifest};
pub use overlap::{overlap, overlap_backend, split_rendered};

use crate::dataset::DatasetError;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_MISSING_FILE: u8 = 3;
pub const EXIT_SCHEMA: u8 = 4;
pub const EXIT_RUNTIME: u8 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("{0}")]
    Schema(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::MissingFile(_) => EXIT_MISSING_FILE,
            CliError::Schema(_) => EXIT_SCHEMA,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }

    pub(crate) fn from_io(path: &Path, e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::NotFound {
            CliError::MissingFile(path.to_path_buf())
        } else {
            CliError::Runtime(format!("{}: {e}", path.display()))
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        if let DatasetError::Io { path, source } = e.root() {
            return CliError::from_io(path, std::io::Error::new(source.kind(), source.to_string()));
        }
        if e.is_schema_violation() {
            CliError::Schema(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "evkit", version, about = "Entailment verification toolkit")]
pub struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Root seed; every component derives its own seed from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for the content-addressed reply cache.
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// error, warn, info, debug or trace.
    #[arg(long, global = true)]
    pub log_level: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct BackendArgs {
    /// Base URL of an OpenAI-compatible API, or `mock://overlap` for the
    /// offline lexical-overlap backend.
    #[arg(long)]
    pub backend_url: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    /// completion (token log-probabilities) or chat (generated label).
    #[arg(long)]
    pub api_mode: Option<String>,
    #[arg(long)]
    pub top_logprobs: Option<usize>,
    /// Environment variable holding the API key.
    #[arg(long)]
    pub api_key_env: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ScoringArgs {
    #[command(flatten)]
    pub backend: BackendArgs,
    /// Built-in template name (P1 to P5).
    #[arg(long)]
    pub template: Option<String>,
    /// JSON template file with `name`, `body` and optional `demos`.
    #[arg(long)]
    pub template_file: Option<PathBuf>,
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Maximum concurrent backend requests.
    #[arg(long)]
    pub parallelism: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a source file into entailment instances.
    Convert {
        /// nli, qa, rationale or instance.
        #[arg(long)]
        schema: String,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Question-to-statement service; the built-in rules are the fallback.
        #[arg(long)]
        converter_url: Option<String>,
    },
    /// Score instances with a backend.
    Score {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        scoring: ScoringArgs,
    },
    /// Macro-F1 reports from scored files, one system per input.
    Eval {
        #[arg(long, required = true)]
        input: Vec<PathBuf>,
        #[arg(long)]
        output: PathBuf,
        /// dataset, category or reasoning_type.
        #[arg(long, default_value = "dataset")]
        group_by: String,
        /// Also write a systems × datasets text table here.
        #[arg(long)]
        table: Option<PathBuf>,
        /// Average F1 over every class seen in golds or predictions, with
        /// undefined F1 counted as 0.
        #[arg(long)]
        zero_absent_classes: bool,
    },
    /// Mine ranking pairs from QA options or generated negatives.
    Mine {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// qa (pair the correct option with each incorrect one) or instance
        /// (ask the backend for contradicted hypotheses).
        #[arg(long, default_value = "qa")]
        schema: String,
        #[command(flatten)]
        scoring: ScoringArgs,
    },
    /// Train the hashed-feature scorer.
    Train {
        /// Instances for classification, ranking pairs for ranking.
        #[arg(long, required_unless_present = "synthetic")]
        train: Option<PathBuf>,
        #[arg(long, required_unless_present = "synthetic")]
        dev: Option<PathBuf>,
        /// Use the bundled separable synthetic set (2000 train / 500 dev).
        #[arg(long, conflicts_with_all = ["train", "dev"])]
        synthetic: bool,
        /// classification or ranking.
        #[arg(long, default_value = "classification")]
        objective: String,
        /// Checkpoint path; the training log goes to `<output>.log.jsonl`.
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        learning_rate: Option<f64>,
        /// Use the learning rate tuned for the synthetic sets.
        #[arg(long, conflicts_with = "learning_rate")]
        desk_scale: bool,
        #[arg(long)]
        margin: Option<f64>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        total_steps: Option<usize>,
        #[arg(long)]
        eval_every: Option<usize>,
        #[arg(long)]
        warmup_ratio: Option<f64>,
        /// Use the ranking hinge with the sign as originally printed.
        #[arg(long)]
        paper_literal_eq2: bool,
    },
    /// Filter chain-of-thought samples by entailment score, then vote.
    FilterSc {
        #[arg(long)]
        samples: PathBuf,
        /// Per-question traces; the summary goes to `<output>.summary.json`.
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        /// score_sum or lexicographic.
        #[arg(long)]
        tie_break: Option<String>,
        #[command(flatten)]
        scoring: ScoringArgs,
    },
    /// Filtered accuracy for several k over one scoring pass.
    AblateK {
        #[arg(long, required_unless_present = "simulate")]
        samples: Option<PathBuf>,
        /// Use the seeded Beta-noise simulation instead of samples.
        #[arg(long, conflicts_with = "samples")]
        simulate: bool,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "3,5,10,20,30")]
        k_set: Vec<usize>,
        #[arg(long)]
        tie_break: Option<String>,
        #[command(flatten)]
        scoring: ScoringArgs,
    },
    /// Agreement statistics for 5-way annotations.
    Agreement {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Pairwise agreement over raw 5-way labels instead of collapsed ones.
        #[arg(long)]
        five_way: bool,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Convert { .. } => "convert",
            Command::Score { .. } => "score",
            Command::Eval { .. } => "eval",
            Command::Mine { .. } => "mine",
            Command::Train { .. } => "train",
            Command::FilterSc { .. } => "filter-sc",
            Command::AblateK { .. } => "ablate-k",
            Command::Agreement { .. } => "agreement",
        }
    }
}

fn init_logging(level: &str) {
    let _ = env_logger::Builder::new().parse_filters(level).format_timestamp(None).try_init();
}

/// Entry point of the `evkit` binary.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let file_level = cli
        .config
        .as_deref()
        .and_then(|p| FileConfig::load(p).ok())
        .and_then(|c| c.log_level);
    init_logging(&pick(cli.log_level.clone(), file_level, "warn".to_string()));
    match run(&cli, std::env::args().collect(), None) {
        Ok(outcome) => {
            println!("{}", serde_json::to_string_pretty(&outcome.summary).unwrap_or_default());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn parser_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn dataset_errors_map_to_exit_codes() {
        let missing = crate::dataset::read_records::<crate::EvInstance>(Path::new("/nonexistent/x.jsonl")).unwrap_err();
        assert_eq!(CliError::from(missing).exit_code(), EXIT_MISSING_FILE);
        let bad = crate::dataset::io::parse_records::<crate::EvInstance, _>("{}\n".as_bytes()).unwrap_err();
        assert_eq!(CliError::from(bad).exit_code(), EXIT_SCHEMA);
    }
}
