use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::Utc;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{pick, FileConfig, ResolvedBackend, ResolvedConfig};
use super::manifest::{manifest_path, FileDigest, RunManifest};
use super::overlap::overlap_backend;
use super::{Cli, CliError, Command, ScoringArgs};
use crate::dataset::statement::ExternalConverter;
use crate::dataset::{
    build_negative_generation_prompt, load_instances, load_source, mine_negatives_from_options, pairs_from_generated,
    parse_generated_negatives, read_records, write_instances, write_records, Label, QaItem, RankPair, RuleConverter,
    SourceSchema, StatementConverter,
};
use crate::hashing::fork_seed;
use crate::metrics::{
    agreement_summary, grouped_report_with, AbsentClassPolicy, AgreementLabels, AnnotationRecord, GroupKey,
    GroupedReport, MetricsError, ResultsTable, DEFAULT_MIN_GROUP_FRACTION,
};
use crate::objectives::synthetic::{attribute_instances, ranking_pairs};
use crate::objectives::{train, Objective, ObjectiveError, RankingOrientation, TrainData, TrainingConfig};
use crate::scoring::{
    batch_score, parallel_map, ApiMode, Backend, BackendError, DirCache, HttpBackend, PromptTemplate, RetryPolicy,
    ScoredInstance, Scorer, ScoringConfig, ScoringError,
};
use crate::selfconsistency::fixtures::{beta_noise_groups, BetaNoiseConfig};
use crate::selfconsistency::{
    decide, evaluate, group_samples, k_ablation, score_groups, CotSample, FilterConfig, QuestionTrace, ScoredGroup,
    SelfConsistencyError, TieBreak,
};

/// URL selecting the offline lexical-overlap backend.
pub const OVERLAP_BACKEND_URL: &str = "mock://overlap";

const GENERATION_MAX_TOKENS: usize = 256;
const SYNTHETIC_TRAIN: usize = 2000;
const SYNTHETIC_DEV: usize = 500;

/// Result of a successful command.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub summary: Value,
    pub manifest: RunManifest,
}

impl From<ScoringError> for CliError {
    fn from(e: ScoringError) -> Self {
        match e {
            ScoringError::Config(_) | ScoringError::Template(_) => CliError::Usage(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<SelfConsistencyError> for CliError {
    fn from(e: SelfConsistencyError) -> Self {
        match e {
            SelfConsistencyError::Scoring(e) => e.into(),
            e => CliError::Schema(e.to_string()),
        }
    }
}

impl From<ObjectiveError> for CliError {
    fn from(e: ObjectiveError) -> Self {
        match e {
            ObjectiveError::Config(_) => CliError::Usage(e.to_string()),
            ObjectiveError::Io(path, source) => CliError::from_io(&path, source),
            e => CliError::Schema(e.to_string()),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::UnknownGroupKey(_) => CliError::Usage(e.to_string()),
            e => CliError::Schema(e.to_string()),
        }
    }
}

fn parse_choice<T: DeserializeOwned>(flag: &str, value: &str) -> Result<T, CliError> {
    serde_json::from_value(Value::String(value.to_string()))
        .map_err(|_| CliError::Usage(format!("invalid value {value:?} for --{flag}")))
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::from_io(path, e))
}

fn to_value<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).unwrap_or(Value::Null)
}

fn require_file(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::MissingFile(path.to_path_buf()))
    }
}

/// With a suffix appended to the file name: `x.jsonl` → `x.jsonl.log.jsonl`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

/// Global settings shared by every command.
struct Context<'a> {
    file: FileConfig,
    seed: u64,
    cache_dir: Option<PathBuf>,
    injected: Option<&'a dyn Backend>,
}

impl<'a> Context<'a> {
    fn new(cli: &Cli, injected: Option<&'a dyn Backend>) -> Result<Self, CliError> {
        let file = match &cli.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        Ok(Self {
            seed: pick(cli.seed, file.seed, 0),
            cache_dir: cli.cache_dir.clone().or_else(|| file.cache_dir.clone()),
            injected,
            file,
        })
    }

    fn base_config(&self) -> ResolvedConfig {
        ResolvedConfig {
            seed: self.seed,
            cache_dir: self.cache_dir.clone(),
            parallelism: pick(None, self.file.parallelism, 1),
            template: None,
            backend: None,
            scoring: None,
            training: None,
            filter: None,
            converter_url: None,
        }
    }

    fn converter(&self, flag: Option<&String>) -> (Box<dyn StatementConverter>, Option<String>) {
        match flag.cloned().or_else(|| self.file.converter_url.clone()) {
            Some(url) => (Box::new(ExternalConverter::new(url.clone())), Some(url)),
            None => (Box::new(RuleConverter), None),
        }
    }

    fn template(&self, args: &ScoringArgs) -> Result<(PromptTemplate, Option<PathBuf>), CliError> {
        if let Some(path) = args.template_file.clone().or_else(|| {
            if args.template.is_some() {
                None
            } else {
                self.file.template_file.clone()
            }
        }) {
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::from_io(&path, e))?;
            let t = serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            return Ok((t, Some(path)));
        }
        match args.template.clone().or_else(|| self.file.template.clone()) {
            Some(name) => PromptTemplate::variant(&name)
                .map(|t| (t, None))
                .ok_or_else(|| CliError::Usage(format!("unknown template {name:?} (expected P1 to P5)"))),
            None => Ok((PromptTemplate::default_template(), None)),
        }
    }

    fn scoring_config(&self, args: &ScoringArgs) -> Result<ScoringConfig, CliError> {
        let mut cfg = self.file.scoring.clone().unwrap_or_default();
        if let Some(t) = args.threshold {
            cfg.threshold = t;
        }
        cfg.rng_seed = fork_seed(self.seed, "scoring");
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve_backend(&self, args: &ScoringArgs) -> Result<ResolvedBackend, CliError> {
        let file = &self.file.backend;
        let b = &args.backend;
        let url = b
            .backend_url
            .clone()
            .or_else(|| file.url.clone())
            .ok_or_else(|| CliError::Usage("no backend configured (use --backend-url)".into()))?;
        Ok(ResolvedBackend {
            url,
            model: b.model.clone().or_else(|| file.model.clone()),
            api_mode: pick(b.api_mode.clone(), file.api_mode.clone(), "completion".to_string()),
            top_logprobs: pick(b.top_logprobs, file.top_logprobs, 5),
            api_key_env: b.api_key_env.clone().or_else(|| file.api_key_env.clone()),
        })
    }

    /// The injected backend if any, else one built from the resolved settings.
    fn backend(
        &self,
        args: &ScoringArgs,
        template: &PromptTemplate,
    ) -> Result<(BackendHandle<'a>, Option<ResolvedBackend>), CliError> {
        if let Some(b) = self.injected {
            return Ok((BackendHandle::Borrowed(b), None));
        }
        let resolved = self.resolve_backend(args)?;
        let backend: Box<dyn Backend> = if resolved.url == OVERLAP_BACKEND_URL {
            Box::new(overlap_backend(template.clone()))
        } else if resolved.url.starts_with("http://") || resolved.url.starts_with("https://") {
            let mode: ApiMode = parse_choice("api-mode", &resolved.api_mode)?;
            let model = resolved
                .model
                .clone()
                .ok_or_else(|| CliError::Usage("--model is required for an HTTP backend".into()))?;
            let key = match &resolved.api_key_env {
                Some(var) => Some(
                    std::env::var(var).map_err(|_| CliError::Usage(format!("environment variable {var} is not set")))?,
                ),
                None => None,
            };
            Box::new(
                HttpBackend::new(resolved.url.clone(), model, mode)
                    .with_top_n(resolved.top_logprobs)
                    .with_api_key(key),
            )
        } else {
            return Err(CliError::Usage(format!(
                "unsupported backend url {:?} (expected http(s)://… or {OVERLAP_BACKEND_URL})",
                resolved.url
            )));
        };
        Ok((BackendHandle::Owned(backend), Some(resolved)))
    }

    fn cache(&self) -> Result<Option<DirCache>, CliError> {
        match &self.cache_dir {
            Some(dir) => DirCache::new(dir).map(Some).map_err(|e| CliError::from_io(dir, e)),
            None => Ok(None),
        }
    }

    fn parallelism(&self, args: &ScoringArgs) -> Result<usize, CliError> {
        let p = pick(args.parallelism, self.file.parallelism, 1);
        if p == 0 {
            return Err(CliError::Usage("parallelism must be at least 1".into()));
        }
        Ok(p)
    }
}

enum BackendHandle<'a> {
    Borrowed(&'a dyn Backend),
    Owned(Box<dyn Backend>),
}

impl BackendHandle<'_> {
    fn get(&self) -> &dyn Backend {
        match self {
            BackendHandle::Borrowed(b) => *b,
            BackendHandle::Owned(b) => b.as_ref(),
        }
    }
}

/// Everything the scoring commands share, resolved once.
struct ScoringSetup<'a> {
    backend: BackendHandle<'a>,
    template: PromptTemplate,
    template_file: Option<PathBuf>,
    config: ScoringConfig,
    cache: Option<DirCache>,
    parallelism: usize,
    resolved: ResolvedConfig,
}

impl<'a> ScoringSetup<'a> {
    fn new(ctx: &Context<'a>, args: &ScoringArgs) -> Result<Self, CliError> {
        let (template, template_file) = ctx.template(args)?;
        let config = ctx.scoring_config(args)?;
        let parallelism = ctx.parallelism(args)?;
        let (backend, resolved_backend) = ctx.backend(args, &template)?;
        let mut resolved = ctx.base_config();
        resolved.parallelism = parallelism;
        resolved.template = Some(template.name().to_string());
        resolved.backend = resolved_backend;
        resolved.scoring = Some(config.clone());
        Ok(Self {
            backend,
            template,
            template_file,
            config,
            cache: ctx.cache()?,
            parallelism,
            resolved,
        })
    }

    fn scorer(&self) -> Scorer<'_> {
        let scorer = Scorer::new(self.backend.get(), &self.template, &self.config).with_retry(RetryPolicy::default());
        match &self.cache {
            Some(c) => scorer.with_cache(c),
            None => scorer,
        }
    }

    fn backend_id(&self) -> String {
        self.backend.get().id().to_string()
    }
}

/// Pieces of the manifest a command fills in.
struct Report {
    config: ResolvedConfig,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    backend_id: Option<String>,
    template_name: Option<String>,
    summary: Value,
}

impl Report {
    fn new(config: ResolvedConfig, inputs: Vec<PathBuf>, outputs: Vec<PathBuf>, summary: Value) -> Self {
        Self {
            config,
            inputs,
            outputs,
            backend_id: None,
            template_name: None,
            summary,
        }
    }

    fn scored_by(mut self, setup: &ScoringSetup<'_>) -> Self {
        self.backend_id = Some(setup.backend_id());
        self.template_name = Some(setup.template.name().to_string());
        if let Some(path) = &setup.template_file {
            self.inputs.push(path.clone());
        }
        self
    }
}

/// Runs one parsed command line. `args` is recorded in the manifest;
/// `injected` replaces the configured backend.
pub fn run(cli: &Cli, args: Vec<String>, injected: Option<&dyn Backend>) -> Result<Outcome, CliError> {
    let started_at = Utc::now();
    let ctx = Context::new(cli, injected)?;
    let report = match &cli.command {
        Command::Convert {
            schema,
            input,
            output,
            converter_url,
        } => cmd_convert(&ctx, schema, input, output, converter_url.as_ref())?,
        Command::Score { input, output, scoring } => cmd_score(&ctx, input, output, scoring)?,
        Command::Eval {
            input,
            output,
            group_by,
            table,
            zero_absent_classes,
        } => cmd_eval(&ctx, input, output, group_by, table.as_deref(), *zero_absent_classes)?,
        Command::Mine {
            input,
            output,
            schema,
            scoring,
        } => cmd_mine(&ctx, input, output, schema, scoring)?,
        Command::Train { .. } => cmd_train(&ctx, &cli.command)?,
        Command::FilterSc {
            samples,
            output,
            k,
            tie_break,
            scoring,
        } => cmd_filter_sc(&ctx, samples, output, *k, tie_break.as_deref(), scoring)?,
        Command::AblateK {
            samples,
            simulate,
            output,
            k_set,
            tie_break,
            scoring,
        } => cmd_ablate_k(&ctx, samples.as_deref(), *simulate, output, k_set, tie_break.as_deref(), scoring)?,
        Command::Agreement {
            input,
            output,
            five_way,
        } => cmd_agreement(&ctx, input, output, *five_way)?,
    };
    let digests = |paths: &[PathBuf]| paths.iter().map(|p| FileDigest::of(p)).collect::<Result<Vec<_>, _>>();
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: cli.command.name().to_string(),
        args,
        config: to_value(&report.config),
        inputs: digests(&report.inputs)?,
        outputs: digests(&report.outputs)?,
        backend_id: report.backend_id,
        template_name: report.template_name,
        seed: ctx.seed,
        summary: report.summary.clone(),
        started_at,
        finished_at: Utc::now(),
    };
    manifest.write(&manifest_path(&report.outputs[0]))?;
    Ok(Outcome {
        summary: report.summary,
        manifest,
    })
}

fn label_counts<'a>(labels: impl Iterator<Item = &'a Label>) -> BTreeMap<Label, usize> {
    let mut counts = BTreeMap::new();
    for l in labels {
        *counts.entry(*l).or_insert(0) += 1;
    }
    counts
}

fn cmd_convert(
    ctx: &Context<'_>,
    schema: &str,
    input: &Path,
    output: &Path,
    converter_url: Option<&String>,
) -> Result<Report, CliError> {
    let schema: SourceSchema = schema.parse().map_err(CliError::Usage)?;
    let (converter, url) = ctx.converter(converter_url);
    let conversion = load_source(input, schema, converter.as_ref())?;
    write_instances(&conversion.instances, output)?;
    let summary = json!({
        "instances": conversion.instances.len(),
        "gold": label_counts(conversion.instances.iter().map(|i| &i.gold)),
        "fallback_statements": conversion.fallback_statements,
        "skipped_incorrect_explanations": conversion.skipped_incorrect_explanations,
    });
    let mut config = ctx.base_config();
    config.converter_url = url;
    Ok(Report::new(config, vec![input.into()], vec![output.into()], summary))
}

fn cmd_score(ctx: &Context<'_>, input: &Path, output: &Path, args: &ScoringArgs) -> Result<Report, CliError> {
    let instances = load_instances(input)?;
    let setup = ScoringSetup::new(ctx, args)?;
    let rows = batch_score(&instances, &setup.scorer(), setup.parallelism)?;
    write_records(&rows, output)?;
    let summary = json!({
        "instances": rows.len(),
        "failures": rows.iter().filter(|r| r.is_failed()).count(),
        "unmatched_generations": rows.iter().filter(|r| r.unmatched_generation).count(),
        "predicted": label_counts(rows.iter().filter_map(|r| r.predicted.as_ref())),
    });
    Ok(Report::new(setup.resolved.clone(), vec![input.into()], vec![output.into()], summary).scored_by(&setup))
}

#[derive(Serialize)]
struct SystemReport {
    system: String,
    input: PathBuf,
    report: GroupedReport,
}

fn system_name(path: &Path) -> String {
    let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    name.strip_suffix(".jsonl").unwrap_or(&name).to_string()
}

fn cmd_eval(
    ctx: &Context<'_>,
    inputs: &[PathBuf],
    output: &Path,
    group_by: &str,
    table: Option<&Path>,
    zero_absent: bool,
) -> Result<Report, CliError> {
    let key: GroupKey = group_by.parse()?;
    let policy = if zero_absent {
        AbsentClassPolicy::ZeroUnionClasses
    } else {
        AbsentClassPolicy::SkipUnpredicted
    };
    let mut systems = Vec::with_capacity(inputs.len());
    let mut grid = ResultsTable::new();
    for path in inputs {
        let rows: Vec<ScoredInstance> = read_records(path)?;
        if rows.is_empty() {
            return Err(CliError::Schema(format!("{}: no scored rows", path.display())));
        }
        let name = system_name(path);
        let report = grouped_report_with(&rows, key, policy, DEFAULT_MIN_GROUP_FRACTION);
        if table.is_some() {
            let by_dataset = if key == GroupKey::Dataset {
                report.clone()
            } else {
                grouped_report_with(&rows, GroupKey::Dataset, policy, DEFAULT_MIN_GROUP_FRACTION)
            };
            grid.add_system(&name, &by_dataset);
        }
        systems.push(SystemReport {
            system: name,
            input: path.clone(),
            report,
        });
    }
    write_json(&json!({ "systems": systems }), output)?;
    let mut outputs = vec![output.to_path_buf()];
    if let Some(path) = table {
        std::fs::write(path, grid.render()).map_err(|e| CliError::from_io(path, e))?;
        outputs.push(path.to_path_buf());
    }
    let summary: Vec<Value> = systems
        .iter()
        .map(|s| {
            json!({
                "system": s.system,
                "rows": s.report.pooled.total,
                "failures": s.report.pooled.failures,
                "macro_f1": s.report.pooled.macro_f1,
                "majority_baseline": s.report.pooled.majority_baseline,
            })
        })
        .collect();
    Ok(Report::new(ctx.base_config(), inputs.to_vec(), outputs, json!({ "systems": summary })))
}

fn cmd_mine(ctx: &Context<'_>, input: &Path, output: &Path, schema: &str, args: &ScoringArgs) -> Result<Report, CliError> {
    match schema {
        "qa" => {
            let items: Vec<QaItem> = read_records(input)?;
            let (converter, url) = ctx.converter(None);
            let mut pairs = Vec::new();
            for (row, item) in items.iter().enumerate() {
                let mined = mine_negatives_from_options(item, converter.as_ref())
                    .map_err(|e| CliError::Schema(format!("{}: line {}: {e}", input.display(), row + 1)))?;
                pairs.extend(mined);
            }
            write_records(&pairs, output)?;
            let mut config = ctx.base_config();
            config.converter_url = url;
            let summary = json!({ "items": items.len(), "pairs": pairs.len() });
            Ok(Report::new(config, vec![input.into()], vec![output.into()], summary))
        }
        "instance" => {
            let instances = load_instances(input)?;
            let setup = ScoringSetup::new(ctx, args)?;
            let backend = setup.backend.get();
            let eligible: Vec<_> = instances.iter().filter(|i| i.gold == Label::Support).collect();
            let replies = parallel_map(&eligible, setup.parallelism, |inst| {
                let prompt = build_negative_generation_prompt(&inst.premise, &inst.hypothesis);
                RetryPolicy::default().run(|| backend.generate(&prompt, GENERATION_MAX_TOKENS))
            })?;
            let mut pairs: Vec<RankPair> = Vec::new();
            let (mut failures, mut unparsed) = (0usize, 0usize);
            for (inst, reply) in eligible.iter().zip(replies) {
                match reply {
                    Ok(text) => {
                        let parsed = parse_generated_negatives(&text);
                        if let Some(d) = &parsed.diagnostic {
                            log::warn!("{}: {d}", inst.id);
                            unparsed += 1;
                        }
                        pairs.extend(pairs_from_generated(inst, &parsed.hypotheses));
                    }
                    Err(e @ BackendError::Unsupported(_)) => return Err(CliError::Runtime(e.to_string())),
                    Err(e) => {
                        log::warn!("{}: {e}", inst.id);
                        failures += 1;
                    }
                }
            }
            write_records(&pairs, output)?;
            let summary = json!({
                "instances": instances.len(),
                "eligible": eligible.len(),
                "pairs": pairs.len(),
                "failures": failures,
                "unparsed_replies": unparsed,
            });
            Ok(Report::new(setup.resolved.clone(), vec![input.into()], vec![output.into()], summary).scored_by(&setup))
        }
        other => Err(CliError::Usage(format!("unknown mining schema {other:?} (expected qa or instance)"))),
    }
}

fn cmd_train(ctx: &Context<'_>, command: &Command) -> Result<Report, CliError> {
    let Command::Train {
        train: train_path,
        dev: dev_path,
        synthetic,
        objective,
        output,
        learning_rate,
        desk_scale,
        margin,
        batch_size,
        total_steps,
        eval_every,
        warmup_ratio,
        paper_literal_eq2,
    } = command
    else {
        unreachable!("cmd_train called with another command")
    };
    let objective: Objective = parse_choice("objective", objective)?;
    let mut cfg = if *desk_scale {
        TrainingConfig::desk_scale(objective)
    } else {
        ctx.file.training.clone().unwrap_or_default()
    };
    cfg.objective = objective;
    cfg.learning_rate = learning_rate.unwrap_or(cfg.learning_rate);
    cfg.margin = margin.unwrap_or(cfg.margin);
    cfg.batch_size = batch_size.unwrap_or(cfg.batch_size);
    cfg.total_steps = total_steps.unwrap_or(cfg.total_steps);
    cfg.eval_every = eval_every.unwrap_or(cfg.eval_every);
    cfg.warmup_ratio = warmup_ratio.unwrap_or(cfg.warmup_ratio);
    if *paper_literal_eq2 {
        cfg.orientation = RankingOrientation::PaperLiteral;
    }
    cfg.seed = fork_seed(ctx.seed, "train");
    cfg.validate()?;

    let mut inputs = Vec::new();
    let outcome = if *synthetic {
        let data_seed = fork_seed(ctx.seed, "train/synthetic");
        match objective {
            Objective::Classification => {
                let tr = attribute_instances(SYNTHETIC_TRAIN, data_seed, "train");
                let dv = attribute_instances(SYNTHETIC_DEV, fork_seed(data_seed, "dev"), "dev");
                train(TrainData::Instances(&tr), TrainData::Instances(&dv), &cfg)?
            }
            Objective::Ranking => {
                let tr = ranking_pairs(SYNTHETIC_TRAIN, data_seed);
                let dv = ranking_pairs(SYNTHETIC_DEV, fork_seed(data_seed, "dev"));
                train(TrainData::Pairs(&tr), TrainData::Pairs(&dv), &cfg)?
            }
        }
    } else {
        let (tp, dp) = match (train_path, dev_path) {
            (Some(t), Some(d)) => (t, d),
            _ => return Err(CliError::Usage("--train and --dev are required without --synthetic".into())),
        };
        require_file(tp)?;
        require_file(dp)?;
        inputs.extend([tp.clone(), dp.clone()]);
        match objective {
            Objective::Classification => {
                let (tr, dv) = (load_instances(tp)?, load_instances(dp)?);
                train(TrainData::Instances(&tr), TrainData::Instances(&dv), &cfg)?
            }
            Objective::Ranking => {
                let tr: Vec<RankPair> = read_records(tp)?;
                let dv: Vec<RankPair> = read_records(dp)?;
                train(TrainData::Pairs(&tr), TrainData::Pairs(&dv), &cfg)?
            }
        }
    };
    outcome.best.save(output)?;
    let log_path = sibling(output, ".log.jsonl");
    write_records(&outcome.log, &log_path)?;
    let summary = json!({
        "objective": objective,
        "dev_metric": if objective == Objective::Classification { "macro_f1" } else { "pair_accuracy" },
        "best_step": outcome.best.step,
        "best_dev_metric": outcome.best.dev_metric,
        "evaluations": outcome.log.len(),
    });
    let mut config = ctx.base_config();
    config.training = Some(cfg);
    Ok(Report::new(config, inputs, vec![output.clone(), log_path], summary))
}

fn filter_config(ctx: &Context<'_>, k: Option<usize>, tie_break: Option<&str>) -> Result<FilterConfig, CliError> {
    let mut cfg = ctx.file.filter.unwrap_or_default();
    cfg.k = k.unwrap_or(cfg.k);
    if let Some(t) = tie_break {
        cfg.tie_break = parse_choice::<TieBreak>("tie-break", t)?;
    }
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

fn load_and_score(
    ctx: &Context<'_>,
    samples: &Path,
    setup: &ScoringSetup<'_>,
) -> Result<(Vec<ScoredGroup>, Option<String>), CliError> {
    let groups = group_samples(read_records::<CotSample>(samples)?)?;
    if groups.is_empty() {
        return Err(CliError::Schema(format!("{}: no samples", samples.display())));
    }
    let (converter, url) = ctx.converter(None);
    let scored = score_groups(groups, &setup.scorer(), converter.as_ref(), setup.parallelism)?;
    Ok((scored, url))
}

fn cmd_filter_sc(
    ctx: &Context<'_>,
    samples: &Path,
    output: &Path,
    k: Option<usize>,
    tie_break: Option<&str>,
    args: &ScoringArgs,
) -> Result<Report, CliError> {
    let filter = filter_config(ctx, k, tie_break)?;
    require_file(samples)?;
    let setup = ScoringSetup::new(ctx, args)?;
    let (scored, url) = load_and_score(ctx, samples, &setup)?;
    let failed: usize = scored.iter().map(|g| g.failures.len()).sum();
    let has_gold = scored.iter().all(|g| g.group.gold_answer.is_some());
    let (traces, summary) = if has_gold {
        let mut report = evaluate(&scored, &filter)?;
        let traces = std::mem::take(&mut report.traces);
        (traces, to_value(&report))
    } else {
        let traces: Vec<QuestionTrace> = scored.iter().map(|g| decide(g, filter.k, filter.tie_break)).collect();
        let summary = json!({
            "k": filter.k,
            "tie_break": filter.tie_break,
            "questions": traces.len(),
            "vanilla_accuracy": null,
            "filtered_accuracy": null,
            "vanilla_abstained": traces.iter().filter(|t| t.vanilla_answer.is_none()).count(),
            "filtered_abstained": traces.iter().filter(|t| t.filtered_answer.is_none()).count(),
            "failed_samples": failed,
        });
        (traces, summary)
    };
    write_records(&traces, output)?;
    let summary_path = sibling(output, ".summary.json");
    write_json(&summary, &summary_path)?;
    let mut config = setup.resolved.clone();
    config.filter = Some(filter);
    config.converter_url = url;
    Ok(Report::new(config, vec![samples.into()], vec![output.into(), summary_path], summary).scored_by(&setup))
}

fn cmd_ablate_k(
    ctx: &Context<'_>,
    samples: Option<&Path>,
    simulate: bool,
    output: &Path,
    k_set: &[usize],
    tie_break: Option<&str>,
    args: &ScoringArgs,
) -> Result<Report, CliError> {
    if k_set.is_empty() || k_set.contains(&0) {
        return Err(CliError::Usage("--k-set needs positive values".into()));
    }
    let filter = filter_config(ctx, Some(k_set[0]), tie_break)?;
    let mut config = ctx.base_config();
    config.filter = Some(filter);
    let (ablation, inputs, setup) = if simulate {
        let sim = BetaNoiseConfig {
            seed: fork_seed(ctx.seed, "ablate-k/simulate"),
            ..BetaNoiseConfig::default()
        };
        let scored = beta_noise_groups(&sim);
        (k_ablation(&scored, k_set, filter.tie_break)?, Vec::new(), None)
    } else {
        let path = samples.ok_or_else(|| CliError::Usage("--samples or --simulate is required".into()))?;
        require_file(path)?;
        let setup = ScoringSetup::new(ctx, args)?;
        let (scored, url) = load_and_score(ctx, path, &setup)?;
        config = ScoringSetup::resolved_with(&setup, config.filter, url);
        (k_ablation(&scored, k_set, filter.tie_break)?, vec![path.to_path_buf()], Some(setup))
    };
    write_json(&ablation, output)?;
    let best = ablation
        .points
        .iter()
        .fold(None::<(usize, f64)>, |acc, p| match acc {
            Some((_, a)) if a >= p.accuracy => acc,
            _ => Some((p.k, p.accuracy)),
        })
        .map(|(k, _)| k);
    let mut summary = to_value(&ablation);
    summary["best_k"] = json!(best);
    let report = Report::new(config, inputs, vec![output.into()], summary);
    Ok(match &setup {
        Some(s) => report.scored_by(s),
        None => report,
    })
}

impl ScoringSetup<'_> {
    fn resolved_with(&self, filter: Option<FilterConfig>, converter_url: Option<String>) -> ResolvedConfig {
        let mut config = self.resolved.clone();
        config.filter = filter;
        config.converter_url = converter_url;
        config
    }
}

fn cmd_agreement(ctx: &Context<'_>, input: &Path, output: &Path, five_way: bool) -> Result<Report, CliError> {
    let records: Vec<AnnotationRecord> = read_records(input)?;
    let labels = if five_way {
        AgreementLabels::FiveWay
    } else {
        AgreementLabels::Collapsed
    };
    let summary = agreement_summary(&records, labels)?;
    write_json(&summary, output)?;
    let brief = json!({
        "instances": summary.instances,
        "pairwise": summary.pairwise.ratio,
        "fleiss_kappa_binary": summary.fleiss_kappa_binary,
        "fleiss_kappa_five_way": summary.fleiss_kappa_five_way,
    });
    Ok(Report::new(ctx.base_config(), vec![input.into()], vec![output.into()], brief))
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("evkit").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn eval_of_perfect_predictions_is_one() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("sys.jsonl");
        let rows: Vec<ScoredInstance> = (0..6)
            .map(|i| {
                let gold = if i % 2 == 0 { Label::Support } else { Label::NotSupport };
                ScoredInstance {
                    id: format!("r{i}"),
                    dataset: "d".into(),
                    category: crate::Category::Nli,
                    reasoning_type: None,
                    gold,
                    predicted: Some(gold),
                    score: None,
                    unmatched_generation: false,
                    error: None,
                }
            })
            .collect();
        write_records(&rows, &input).unwrap();
        let out = dir.path().join("report.json");
        let cli = parse(&["eval", "--input", input.to_str().unwrap(), "--output", out.to_str().unwrap()]);
        let outcome = run(&cli, vec![], None).unwrap();
        assert_eq!(outcome.summary["systems"][0]["macro_f1"], json!(1.0));
        assert!(manifest_path(&out).exists());
    }

    #[test]
    fn missing_backend_is_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("in.jsonl");
        std::fs::write(&input, "").unwrap();
        let cli = parse(&["score", "--input", input.to_str().unwrap(), "--output", "/dev/null"]);
        assert_eq!(run(&cli, vec![], None).unwrap_err().exit_code(), super::super::EXIT_USAGE);
    }

    #[test]
    fn sibling_paths() {
        assert_eq!(sibling(Path::new("a/b.json"), ".log.jsonl"), Path::new("a/b.json.log.jsonl"));
        assert_eq!(system_name(Path::new("x/gpt.jsonl")), "gpt");
    }
}
