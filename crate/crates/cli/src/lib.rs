//! The `newsxplain` command line.
//!
//! Every subcommand writes its outputs under `--out` (default `out/`) with
//! stable names and records a [`RunManifest`] in `<out>/manifests/`.

pub mod manifest;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use newsxplain::corpus::{ingest, Corpus, FieldMapping, Format, Label, Source};
use newsxplain::dataset::{build_configuration, ConfigName, DatasetConfiguration};
use newsxplain::eval::{default_stopwords, evaluate, term_cloud, EvaluationReport};
use newsxplain::explain::{explain_with, ExplainOptions, Masking, Strategy};
use newsxplain::models::artifact::train_model;
use newsxplain::models::{load_artifact, save_artifact, Hyperparameters, ModelArtifact, ModelKind};
use newsxplain::rng::derive_seed;
use thiserror::Error;

pub use manifest::{FileDigest, RunManifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
        }
    }
}

fn data<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Data(e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "newsxplain",
    version,
    about = "Explainable fake-news classification pipeline"
)]
pub struct Cli {
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    /// Global seed; stage seeds are derived from it.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Read a labeled CSV/JSONL corpus and write it in normalized JSONL form.
    Ingest(IngestArgs),
    /// Materialize one of the configurations C1..C7.
    BuildConfig(BuildConfigArgs),
    /// Train a model on a configuration.
    Train(TrainArgs),
    /// Evaluate a saved model on a configuration's test split.
    Evaluate(EvaluateArgs),
    /// Explain one prediction as per-token force values (JSON on stdout).
    Explain(ExplainArgs),
    /// Most frequent terms of one class.
    Cloud(CloudArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
    /// Train and evaluate every model on every configuration.
    Grid(GridArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "other")]
    pub source: Source,
    /// Input format; inferred from the extension when omitted.
    #[arg(long)]
    pub format: Option<Format>,
    #[arg(long, default_value = "text")]
    pub text_field: String,
    #[arg(long, default_value = "label")]
    pub label_field: String,
    /// Id column; ids are synthesized when omitted.
    #[arg(long)]
    pub id_field: Option<String>,
    /// Output corpus name (default: the input file stem).
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Args)]
pub struct CorporaArgs {
    /// CoAID-style corpus.
    #[arg(long, default_value = "fixtures/coaid_like.jsonl")]
    pub coaid: PathBuf,
    /// COVID-19 rumor corpus.
    #[arg(long, default_value = "fixtures/c19rumor_like.jsonl")]
    pub c19: PathBuf,
}

#[derive(Debug, Args)]
pub struct BuildConfigArgs {
    /// C1..C7.
    #[arg(long)]
    pub name: ConfigName,
    #[command(flatten)]
    pub corpora: CorporaArgs,
}

/// A configuration either read from a `build-config` directory or rebuilt
/// from the two corpora.
#[derive(Debug, Args)]
pub struct ConfigSource {
    /// Directory written by `build-config`.
    #[arg(long, conflicts_with = "name")]
    pub config_dir: Option<PathBuf>,
    /// Rebuild configuration C1..C7 from the corpora instead.
    #[arg(long)]
    pub name: Option<ConfigName>,
    #[command(flatten)]
    pub corpora: CorporaArgs,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// nb, logreg or cnn.
    #[arg(long)]
    pub model: ModelKind,
    #[command(flatten)]
    pub config: ConfigSource,
    /// Hyperparameter override `key=value` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Saved model artifact.
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub config: ConfigSource,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Auto,
    Exact,
    Kernel,
    Permutation,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MaskingArg {
    Remove,
    Pad,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub text: String,
    /// Coalition budget for the sampling estimators.
    #[arg(long, default_value_t = 4096)]
    pub budget: usize,
    #[arg(long, value_enum, default_value = "auto")]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value = "remove")]
    pub masking: MaskingArg,
}

#[derive(Debug, Args)]
pub struct CloudArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "other")]
    pub source: Source,
    #[arg(long, value_parser = parse_label)]
    pub label: Label,
    #[arg(long, default_value_t = 20)]
    pub top_k: usize,
    /// Stopword file, one word per line (default: bundled English list).
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Model artifact (default: `MODEL_PATH`).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Listen address (default: `BIND_ADDR` or 127.0.0.1:8080).
    #[arg(long)]
    pub bind: Option<std::net::SocketAddr>,
    /// Explanation budget (default: `EXPLAIN_BUDGET` or 4096).
    #[arg(long)]
    pub budget: Option<usize>,
    /// Allowed origins, `*` or a comma-separated list (default: `CORS_ORIGINS` or `*`).
    #[arg(long)]
    pub cors: Option<String>,
    /// Record raw request text in the request log.
    #[arg(long)]
    pub log_text: bool,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, value_delimiter = ',', default_value = "nb,logreg,cnn")]
    pub models: Vec<ModelKind>,
    /// Configurations to run (default: all seven).
    #[arg(long, value_delimiter = ',')]
    pub configs: Vec<ConfigName>,
    #[command(flatten)]
    pub corpora: CorporaArgs,
    /// Hyperparameter override `key=value` or `model.key=value` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

fn parse_label(s: &str) -> Result<Label, String> {
    Label::parse_loose(s).ok_or_else(|| format!("unknown label `{s}` (expected fake or real)"))
}

/// Parse arguments and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let argv: Vec<String> = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match execute(&cli, &argv) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli, argv: &[String]) -> Result<(), CliError> {
    match &cli.command {
        Command::Ingest(a) => run_ingest(cli, argv, a),
        Command::BuildConfig(a) => run_build_config(cli, argv, a),
        Command::Train(a) => run_train(cli, argv, a),
        Command::Evaluate(a) => run_evaluate(cli, argv, a),
        Command::Explain(a) => run_explain(cli, argv, a),
        Command::Cloud(a) => run_cloud(cli, argv, a),
        Command::Serve(a) => run_serve(cli, argv, a),
        Command::Grid(a) => run_grid(cli, argv, a),
    }
}

/// Write to stdout, treating a closed pipe as success.
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        create_dir(parent)?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn load_corpus(path: &Path, source: Source) -> Result<Corpus, CliError> {
    let format = Format::from_path(path).ok_or_else(|| {
        CliError::Usage(format!(
            "{}: cannot infer format (use .csv or .jsonl)",
            path.display()
        ))
    })?;
    Ok(ingest(path, format, &FieldMapping::standard(source))
        .map_err(data)?
        .0)
}

fn load_corpora(c: &CorporaArgs) -> Result<(Corpus, Corpus), CliError> {
    Ok((
        load_corpus(&c.coaid, Source::CoAid)?,
        load_corpus(&c.c19, Source::C19Rumor)?,
    ))
}

fn resolve_config(
    src: &ConfigSource,
    seed: u64,
    m: &mut RunManifest,
) -> Result<DatasetConfiguration, CliError> {
    if let Some(dir) = &src.config_dir {
        m.param("config_dir", dir.display().to_string());
        let config = DatasetConfiguration::load_dir(dir).map_err(data)?;
        for split in [
            "manifest.json",
            "train.jsonl",
            "validation.jsonl",
            "test.jsonl",
        ] {
            m.input(&dir.join(split)).map_err(data)?;
        }
        m.seed("config", config.seed);
        return Ok(config);
    }
    let name = src
        .name
        .ok_or_else(|| CliError::Usage("either --config-dir or --name is required".to_string()))?;
    let (coaid, c19) = load_corpora(&src.corpora)?;
    m.input(&src.corpora.coaid)
        .map_err(data)?
        .input(&src.corpora.c19)
        .map_err(data)?;
    m.seed("config", seed);
    build_configuration(name, &coaid, &c19, seed).map_err(data)
}

/// Apply `key=value` / `model.key=value` overrides to the defaults of `kind`.
pub fn hyperparameters(kind: ModelKind, overrides: &[String]) -> Result<Hyperparameters, CliError> {
    let mut hp = Hyperparameters::defaults(kind);
    for o in overrides {
        let (key, value) = o
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("override `{o}` is not KEY=VALUE")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("override `{o}` has a non-numeric value")))?;
        let key = match key.split_once('.') {
            Some((model, k)) => {
                let model = model
                    .parse::<ModelKind>()
                    .map_err(|e| CliError::Usage(e.to_string()))?;
                if model != kind {
                    continue;
                }
                k
            }
            None => key,
        };
        if hp.get(key).is_some() {
            hp.set(key, value);
        }
    }
    hp.resolved(kind)
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn check_overrides(models: &[ModelKind], overrides: &[String]) -> Result<(), CliError> {
    for o in overrides {
        let key = o.split_once('=').map_or(o.as_str(), |(k, _)| k);
        let key = key.split_once('.').map_or(key, |(_, k)| k);
        if !models
            .iter()
            .any(|&m| Hyperparameters::defaults(m).get(key).is_some())
        {
            return Err(CliError::Usage(format!("unknown hyperparameter `{key}`")));
        }
    }
    Ok(())
}

fn train_seed(seed: u64, config: ConfigName, kind: ModelKind) -> u64 {
    derive_seed(seed, &format!("train/{config}/{kind}"))
}

fn train_one(
    config: &DatasetConfiguration,
    kind: ModelKind,
    hp: &Hyperparameters,
    seed: u64,
) -> Result<ModelArtifact, CliError> {
    let mut artifact =
        train_model(kind, &config.train, &config.validation, hp, seed).map_err(data)?;
    artifact.training_meta.config = Some(config.name.to_string());
    Ok(artifact)
}

/// Write `<stem>.json`, `<stem>.md` and `<stem>_confusion.csv` under `dir`.
fn write_report(
    dir: &Path,
    stem: &str,
    report: &EvaluationReport,
) -> Result<Vec<PathBuf>, CliError> {
    let json = dir.join(format!("{stem}.json"));
    let md = dir.join(format!("{stem}.md"));
    let csv = dir.join(format!("{stem}_confusion.csv"));
    write_file(
        &json,
        &(serde_json::to_string_pretty(report).expect("report serializes") + "\n"),
    )?;
    write_file(&md, &report.to_markdown())?;
    write_file(&csv, &report.confusion.to_csv())?;
    Ok(vec![json, md, csv])
}

fn finish(
    m: &mut RunManifest,
    out: &Path,
    outputs: &[PathBuf],
    tag: Option<&str>,
) -> Result<PathBuf, CliError> {
    for p in outputs {
        m.output(p).map_err(data)?;
    }
    m.write(out, tag).map_err(data)
}

fn run_ingest(cli: &Cli, argv: &[String], a: &IngestArgs) -> Result<(), CliError> {
    let format = match a.format {
        Some(f) => f,
        None => Format::from_path(&a.input).ok_or_else(|| {
            CliError::Usage(format!(
                "{}: cannot infer format; pass --format",
                a.input.display()
            ))
        })?,
    };
    let mut mapping = FieldMapping::new(&a.text_field, &a.label_field, a.source);
    if let Some(id) = &a.id_field {
        mapping = mapping.with_id(id);
    }
    let (corpus, stats) = ingest(&a.input, format, &mapping).map_err(data)?;
    let name = a.name.clone().unwrap_or_else(|| {
        a.input
            .file_stem()
            .map_or("corpus".into(), |s| s.to_string_lossy().into_owned())
    });
    let dir = cli.out.join("corpora");
    create_dir(&dir)?;
    let jsonl = dir.join(format!("{name}.jsonl"));
    corpus.write_jsonl(&jsonl).map_err(data)?;
    let summary = serde_json::json!({
        "name": name,
        "items": corpus.len(),
        "real": corpus.real_count(),
        "fake": corpus.fake_count(),
        "stats": stats,
    });
    let stats_path = dir.join(format!("{name}.stats.json"));
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    write_file(&stats_path, &(text.clone() + "\n"))?;
    emit(&format!("{text}\n"));

    let mut m = RunManifest::new("ingest", argv);
    m.param("source", a.source.as_str())
        .param("mapping", &mapping)
        .param("name", &name);
    m.input(&a.input).map_err(data)?;
    finish(&mut m, &cli.out, &[jsonl, stats_path], Some(&name))?;
    Ok(())
}

fn run_build_config(cli: &Cli, argv: &[String], a: &BuildConfigArgs) -> Result<(), CliError> {
    let (coaid, c19) = load_corpora(&a.corpora)?;
    let config = build_configuration(a.name, &coaid, &c19, cli.seed).map_err(data)?;
    let dir = cli.out.join("configs").join(a.name.as_str());
    let written = config.save_dir(&dir).map_err(data)?;
    for (split, c) in config.splits() {
        emit(&format!(
            "{split}: {} items ({} real, {} fake)\n",
            c.len(),
            c.real_count(),
            c.fake_count()
        ));
    }
    let mut m = RunManifest::new("build-config", argv);
    m.param("name", a.name)
        .seed("global", cli.seed)
        .seed("config", cli.seed);
    m.input(&a.corpora.coaid)
        .map_err(data)?
        .input(&a.corpora.c19)
        .map_err(data)?;
    finish(&mut m, &cli.out, &written, Some(a.name.as_str()))?;
    Ok(())
}

fn run_train(cli: &Cli, argv: &[String], a: &TrainArgs) -> Result<(), CliError> {
    check_overrides(&[a.model], &a.overrides)?;
    let hp = hyperparameters(a.model, &a.overrides)?;
    let mut m = RunManifest::new("train", argv);
    let config = resolve_config(&a.config, cli.seed, &mut m)?;
    let seed = train_seed(cli.seed, config.name, a.model);
    let artifact = train_one(&config, a.model, &hp, seed)?;
    let stem = format!("{}_{}", config.name, a.model);
    let path = cli.out.join("models").join(format!("{stem}.json"));
    create_dir(path.parent().unwrap())?;
    save_artifact(&artifact, &path).map_err(data)?;
    let mut line = format!("{} trained on {}", artifact.model_id(), config.name);
    if let Some(loss) = artifact.training_meta.final_train_loss {
        line.push_str(&format!(", final train loss {loss:.6}"));
    }
    emit(&format!("{line}, saved to {}\n", path.display()));
    m.param("model", a.model)
        .param("config", config.name)
        .param("hyperparameters", &hp);
    m.seed("global", cli.seed).seed("train", seed);
    finish(&mut m, &cli.out, &[path], Some(&stem))?;
    Ok(())
}

fn run_evaluate(cli: &Cli, argv: &[String], a: &EvaluateArgs) -> Result<(), CliError> {
    let mut m = RunManifest::new("evaluate", argv);
    let artifact = load_artifact(&a.model).map_err(data)?;
    m.input(&a.model).map_err(data)?;
    let config = resolve_config(&a.config, cli.seed, &mut m)?;
    let report = evaluate(&artifact, &config).map_err(data)?;
    let stem = format!("{}_{}", config.name, artifact.model_kind);
    let outputs = write_report(&cli.out.join("reports"), &stem, &report)?;
    emit(&report.to_markdown());
    m.param("config", config.name)
        .param("model_id", artifact.model_id());
    m.seed("global", cli.seed);
    finish(&mut m, &cli.out, &outputs, Some(&stem))?;
    Ok(())
}

fn run_explain(cli: &Cli, argv: &[String], a: &ExplainArgs) -> Result<(), CliError> {
    let artifact = load_artifact(&a.model).map_err(data)?;
    let model = artifact.load_model().map_err(data)?;
    let seed = derive_seed(cli.seed, "explain");
    let opts = ExplainOptions {
        budget: a.budget,
        seed,
        masking: match a.masking {
            MaskingArg::Remove => Masking::Remove,
            MaskingArg::Pad => Masking::Pad,
        },
        strategy: match a.method {
            MethodArg::Auto => Strategy::Auto,
            MethodArg::Exact => Strategy::Exact,
            MethodArg::Kernel => Strategy::Kernel,
            MethodArg::Permutation => Strategy::Permutation,
        },
    };
    let explanation = explain_with(&model, &a.text, &opts).map_err(data)?;
    let json = serde_json::to_string_pretty(&explanation).expect("explanation serializes");
    emit(&format!("{json}\n"));
    let mut m = RunManifest::new("explain", argv);
    m.param("model_id", artifact.model_id())
        .param("text_sha256", manifest::sha256_hex(a.text.as_bytes()))
        .param("budget", a.budget)
        .param("method", format!("{:?}", a.method).to_lowercase())
        .param("masking", format!("{:?}", a.masking).to_lowercase());
    m.seed("global", cli.seed).seed("explain", seed);
    m.input(&a.model).map_err(data)?;
    m.outputs
        .push(FileDigest::of_bytes("<stdout>", json.as_bytes()));
    m.write(&cli.out, None).map_err(data)?;
    Ok(())
}

fn run_cloud(cli: &Cli, argv: &[String], a: &CloudArgs) -> Result<(), CliError> {
    let corpus = load_corpus(&a.input, a.source)?;
    let stopwords = match &a.stopwords {
        Some(p) => newsxplain::eval::cloud::parse_stopwords(
            &std::fs::read_to_string(p)
                .map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?,
        ),
        None => default_stopwords(),
    };
    let cloud = term_cloud(&corpus, a.label, a.top_k, &stopwords);
    let stem = a
        .input
        .file_stem()
        .map_or("corpus".into(), |s| s.to_string_lossy().into_owned());
    let tag = format!("{stem}_{}", a.label);
    let path = cli.out.join("clouds").join(format!("{tag}.csv"));
    let csv = cloud.to_csv();
    write_file(&path, &csv)?;
    emit(&csv);
    let mut m = RunManifest::new("cloud", argv);
    m.param("label", a.label).param("top_k", a.top_k);
    m.input(&a.input).map_err(data)?;
    if let Some(p) = &a.stopwords {
        m.input(p).map_err(data)?;
    }
    finish(&mut m, &cli.out, &[path], Some(&tag))?;
    Ok(())
}

fn run_serve(cli: &Cli, argv: &[String], a: &ServeArgs) -> Result<(), CliError> {
    use newsxplain_service::{CorsPolicy, RequestLog, ServiceConfig};
    let mut config = ServiceConfig::from_env().map_err(|e| CliError::Usage(e.to_string()))?;
    if std::env::var_os("SEED").is_none() {
        config.seed = derive_seed(cli.seed, "serve");
    }
    if let Some(p) = &a.model {
        config.model_path = Some(p.clone());
    }
    if let Some(b) = a.bind {
        config.bind_addr = b;
    }
    if let Some(b) = a.budget {
        config.explain_budget = b;
    }
    if let Some(c) = &a.cors {
        config.cors = CorsPolicy::parse(c);
    }
    config.log_text |= a.log_text;
    let mut m = RunManifest::new("serve", argv);
    m.param("bind_addr", config.bind_addr.to_string())
        .param("explain_budget", config.explain_budget)
        .param("log_text", config.log_text);
    m.seed("global", cli.seed).seed("serve", config.seed);
    if let Some(p) = &config.model_path {
        m.input(p).map_err(data)?;
    }
    m.write(&cli.out, None).map_err(data)?;
    eprintln!("listening on http://{}", config.bind_addr);
    let runtime = tokio::runtime::Runtime::new().map_err(data)?;
    runtime
        .block_on(newsxplain_service::serve(config, RequestLog::stderr()))
        .map_err(data)
}

fn run_grid(cli: &Cli, argv: &[String], a: &GridArgs) -> Result<(), CliError> {
    if a.models.is_empty() {
        return Err(CliError::Usage(
            "--models must name at least one model".to_string(),
        ));
    }
    check_overrides(&a.models, &a.overrides)?;
    let configs: Vec<ConfigName> = if a.configs.is_empty() {
        ConfigName::ALL.to_vec()
    } else {
        a.configs.clone()
    };
    let (coaid, c19) = load_corpora(&a.corpora)?;
    let mut m = RunManifest::new("grid", argv);
    m.input(&a.corpora.coaid)
        .map_err(data)?
        .input(&a.corpora.c19)
        .map_err(data)?;
    m.seed("global", cli.seed).seed("config", cli.seed);
    let mut hps = BTreeMap::new();
    for &kind in &a.models {
        hps.insert(kind.to_string(), hyperparameters(kind, &a.overrides)?);
    }
    let mut reports = Vec::new();
    let mut outputs = Vec::new();
    for &name in &configs {
        let config = build_configuration(name, &coaid, &c19, cli.seed).map_err(data)?;
        for &kind in &a.models {
            let seed = train_seed(cli.seed, name, kind);
            m.seed(&format!("train/{name}/{kind}"), seed);
            let artifact = train_one(&config, kind, &hps[kind.as_str()], seed)?;
            let stem = format!("{name}_{kind}");
            let model_path = cli.out.join("models").join(format!("{stem}.json"));
            create_dir(model_path.parent().unwrap())?;
            save_artifact(&artifact, &model_path).map_err(data)?;
            outputs.push(model_path);
            let report = evaluate(&artifact, &config).map_err(data)?;
            eprintln!("{}", report.table_row());
            outputs.extend(write_report(&cli.out.join("reports"), &stem, &report)?);
            reports.push((kind, report));
        }
    }
    let mut table =
        String::from("| Configuration | Model | Precision | Recall | F1 | Accuracy |\n");
    table.push_str("|---|---|---|---|---|---|\n");
    for (kind, r) in &reports {
        let [p, rc, f, acc] = r.rounded();
        table.push_str(&format!(
            "| {} | {kind} | {p:.2} | {rc:.2} | {f:.2} | {acc:.2} |\n",
            r.configuration
        ));
    }
    let md = cli.out.join("reports").join("grid.md");
    write_file(&md, &table)?;
    let json = cli.out.join("reports").join("grid.json");
    let all: Vec<&EvaluationReport> = reports.iter().map(|(_, r)| r).collect();
    write_file(
        &json,
        &(serde_json::to_string_pretty(&all).expect("reports serialize") + "\n"),
    )?;
    emit(&table);
    outputs.push(md);
    outputs.push(json);
    m.param("models", &a.models)
        .param("configs", &configs)
        .param("hyperparameters", &hps);
    finish(&mut m, &cli.out, &outputs, None)?;
    Ok(())
}
