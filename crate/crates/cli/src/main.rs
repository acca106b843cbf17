//! Command-line driver: dataset generation, index building, single-query
//! search, and baseline-vs-temporal evaluation runs.
//!
//! Exit codes: 0 success, 1 runtime/I-O failure, 2 usage error.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use timerank::corpus::{load_corpus, save_corpus, save_event_table};
use timerank::datagen::{generate_dataset, GenSpec, QueryType, FEWSHOT_SIZES};
use timerank::evaluation::{
    load_predictions, load_queries, render_report_table, run_eval, save_queries, EvalReport,
};
use timerank::retriever::{
    build_index, load_index, retrieve, save_index, Mode, RetrievalConfig, StatsScope,
};
use timerank::temporal::TemporalConfig;
use timerank::{CivilDate, LexicalHashEncoder};

const REPORT_SCHEMA_VERSION: u32 = 1;
const MANIFEST_SCHEMA_VERSION: u32 = 1;

/// Environment variable naming the default data directory.
const DATA_DIR_ENV: &str = "TIMERANK_DATA_DIR";

#[derive(Parser)]
#[command(name = "timerank", version, about = "Time-aware passage retrieval toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic dataset: corpus, paired test sets,
    /// few-shot splits, and a manifest with output hashes.
    Gen(GenArgs),
    /// Encode a corpus into a searchable index file.
    Index(IndexArgs),
    /// Retrieve top-k passages for a single timestamped question.
    Search(SearchArgs),
    /// Evaluate recall@k (and exact match, given predictions) over a query set.
    Eval(EvalArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Output directory (default: $TIMERANK_DATA_DIR or ./data)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Training-era year range START:END; evaluation queries target END+1.
    #[arg(long, value_name = "START:END")]
    year_range: Option<String>,
    /// Comma-separated tournament names.
    #[arg(long, value_delimiter = ',')]
    tournaments: Option<Vec<String>>,
    /// Comma-separated category names.
    #[arg(long, value_delimiter = ',')]
    categories: Option<Vec<String>>,
    /// Comma-separated subset of winner,runner_up,finalists,score.
    #[arg(long, value_delimiter = ',')]
    query_types: Option<Vec<String>>,
    #[arg(long, default_value_t = 1)]
    passages_per_row: usize,
    /// Comma-separated final months (1-12); tournaments cycle through them.
    #[arg(long, value_delimiter = ',')]
    final_months: Option<Vec<u32>>,
}

#[derive(Args)]
struct IndexArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1024)]
    dim: usize,
}

#[derive(Args, Clone)]
struct RetrievalFlags {
    #[arg(long)]
    top_k: Option<usize>,
    #[arg(long)]
    over_retrieve_factor: Option<usize>,
    /// Temporal score scale factor (ranking-neutral under per-query stats).
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    min_delta_days: Option<i64>,
    /// Disable future-document masking (ablation).
    #[arg(long)]
    no_mask_future: bool,
    /// Normalization statistics population: query | global.
    #[arg(long)]
    stats_scope: Option<String>,
    #[arg(long, default_value_t = 1024)]
    dim: usize,
    /// JSON config file; flags override file values, file overrides defaults.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    question: String,
    /// Query timestamp, YYYY-MM-DD.
    #[arg(long)]
    timestamp: String,
    /// semantic_only | temporal
    #[arg(long, default_value = "temporal")]
    mode: String,
    #[command(flatten)]
    retrieval: RetrievalFlags,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    queries: PathBuf,
    /// semantic_only | temporal
    #[arg(long, default_value = "temporal")]
    mode: String,
    /// Run semantic_only and temporal back to back on the same index.
    #[arg(long)]
    compare: bool,
    /// JSON-lines {"id","prediction"} file for exact-match scoring.
    #[arg(long)]
    predictions: Option<PathBuf>,
    /// Where to write the JSON report.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Omit the wall-clock timestamp from the report (reproducible output).
    #[arg(long)]
    no_clock: bool,
    #[command(flatten)]
    retrieval: RetrievalFlags,
}

enum AppError {
    Usage(String),
    Runtime(String),
}

impl AppError {
    fn usage(msg: impl Into<String>) -> Self {
        AppError::Usage(msg.into())
    }

    fn runtime(msg: impl std::fmt::Display) -> Self {
        AppError::Runtime(msg.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Index(args) => cmd_index(args),
        Command::Search(args) => cmd_search(args),
        Command::Eval(args) => cmd_eval(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(AppError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
    }
}

// ---------------------------------------------------------------------------
// gen

#[derive(Serialize)]
struct Manifest {
    schema_version: u32,
    spec: GenSpec,
    files: BTreeMap<String, String>,
}

fn cmd_gen(args: GenArgs) -> Result<(), AppError> {
    let mut spec = GenSpec {
        seed: args.seed,
        passages_per_row: args.passages_per_row,
        ..GenSpec::default()
    };
    if let Some(range) = &args.year_range {
        spec.year_range = parse_year_range(range)?;
    }
    if let Some(tournaments) = args.tournaments {
        spec.tournaments = tournaments;
    }
    if let Some(categories) = args.categories {
        spec.categories = categories;
    }
    if let Some(final_months) = args.final_months {
        spec.final_months = final_months;
    }
    if let Some(types) = args.query_types {
        spec.query_types = types
            .iter()
            .map(|t| parse_query_type(t))
            .collect::<Result<Vec<_>, _>>()?;
    }
    spec.validate().map_err(|e| AppError::usage(e.to_string()))?;

    let out = args
        .out
        .or_else(|| std::env::var(DATA_DIR_ENV).ok().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("data"));
    fs::create_dir_all(&out).map_err(AppError::runtime)?;

    let dataset = generate_dataset(&spec).map_err(AppError::runtime)?;

    save_event_table(&dataset.rows, out.join("events.csv")).map_err(AppError::runtime)?;
    save_corpus(&dataset.corpus, out.join("corpus.jsonl")).map_err(AppError::runtime)?;
    save_queries(&dataset.tpq.tpq_early, out.join("tpq_early.jsonl")).map_err(AppError::runtime)?;
    save_queries(&dataset.tpq.tpq_late, out.join("tpq_late.jsonl")).map_err(AppError::runtime)?;
    for (split, size) in dataset.fewshot.iter().zip(FEWSHOT_SIZES) {
        save_queries(split, out.join(format!("fewshot_{size}.jsonl"))).map_err(AppError::runtime)?;
    }

    let mut files = BTreeMap::new();
    for name in [
        "events.csv",
        "corpus.jsonl",
        "tpq_early.jsonl",
        "tpq_late.jsonl",
        "fewshot_32.jsonl",
        "fewshot_64.jsonl",
        "fewshot_128.jsonl",
    ] {
        files.insert(name.to_string(), sha256_file(&out.join(name))?);
    }
    let manifest = Manifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        spec,
        files,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(AppError::runtime)?;
    fs::write(out.join("manifest.json"), json + "\n").map_err(AppError::runtime)?;
    println!(
        "wrote {} passages and {} paired queries to {}",
        dataset.corpus.len(),
        dataset.tpq.tpq_early.len(),
        out.display()
    );
    Ok(())
}

fn parse_year_range(s: &str) -> Result<(i32, i32), AppError> {
    let (start, end) = s
        .split_once(':')
        .ok_or_else(|| AppError::usage(format!("year range {s:?} is not START:END")))?;
    let start: i32 = start
        .parse()
        .map_err(|_| AppError::usage(format!("bad year {start:?}")))?;
    let end: i32 = end
        .parse()
        .map_err(|_| AppError::usage(format!("bad year {end:?}")))?;
    if start > end {
        return Err(AppError::usage(format!(
            "year range start {start} exceeds end {end}"
        )));
    }
    Ok((start, end))
}

fn parse_query_type(s: &str) -> Result<QueryType, AppError> {
    match s {
        "winner" => Ok(QueryType::Winner),
        "runner_up" => Ok(QueryType::RunnerUp),
        "finalists" => Ok(QueryType::Finalists),
        "score" => Ok(QueryType::Score),
        other => Err(AppError::usage(format!("unknown query type {other:?}"))),
    }
}

fn sha256_file(path: &Path) -> Result<String, AppError> {
    let bytes = fs::read(path).map_err(AppError::runtime)?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

// ---------------------------------------------------------------------------
// index

fn cmd_index(args: IndexArgs) -> Result<(), AppError> {
    if args.dim == 0 {
        return Err(AppError::usage("--dim must be positive"));
    }
    let corpus = load_corpus(&args.corpus).map_err(AppError::runtime)?;
    let encoder = LexicalHashEncoder::with_dimension(args.dim);
    let index = build_index(corpus, &encoder);
    save_index(&index, &args.out).map_err(AppError::runtime)?;
    println!(
        "indexed {} passages ({}) -> {}",
        index.len(),
        index.encoder_fingerprint(),
        args.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// shared retrieval config resolution

/// Optional values loadable from a JSON config file. Flags override these;
/// these override built-in defaults.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    top_k: Option<usize>,
    over_retrieve_factor: Option<usize>,
    alpha_scale: Option<f64>,
    min_delta_days: Option<i64>,
    mask_future: Option<bool>,
    stats_scope: Option<String>,
}

fn parse_mode(s: &str) -> Result<Mode, AppError> {
    match s {
        "semantic_only" => Ok(Mode::SemanticOnly),
        "temporal" => Ok(Mode::Temporal),
        other => Err(AppError::usage(format!(
            "unknown mode {other:?} (expected semantic_only or temporal)"
        ))),
    }
}

fn parse_scope(s: &str) -> Result<StatsScope, AppError> {
    match s {
        "query" => Ok(StatsScope::Query),
        "global" => Ok(StatsScope::Global),
        other => Err(AppError::usage(format!(
            "unknown stats scope {other:?} (expected query or global)"
        ))),
    }
}

fn resolve_config(flags: &RetrievalFlags, mode: Mode) -> Result<RetrievalConfig, AppError> {
    let file: FileConfig = match &flags.config {
        Some(path) => {
            let content = fs::read_to_string(path).map_err(AppError::runtime)?;
            serde_json::from_str(&content)
                .map_err(|e| AppError::usage(format!("config file: {e}")))?
        }
        None => FileConfig::default(),
    };
    let defaults = RetrievalConfig::default();
    let scope = match flags.stats_scope.as_deref().or(file.stats_scope.as_deref()) {
        Some(s) => parse_scope(s)?,
        None => defaults.stats_scope,
    };
    let cfg = RetrievalConfig {
        top_k: flags.top_k.or(file.top_k).unwrap_or(defaults.top_k),
        over_retrieve_factor: flags
            .over_retrieve_factor
            .or(file.over_retrieve_factor)
            .unwrap_or(defaults.over_retrieve_factor),
        mask_future: if flags.no_mask_future {
            false
        } else {
            file.mask_future.unwrap_or(defaults.mask_future)
        },
        mode,
        temporal: TemporalConfig {
            alpha_scale: flags
                .alpha
                .or(file.alpha_scale)
                .unwrap_or(defaults.temporal.alpha_scale),
            min_delta_days: flags
                .min_delta_days
                .or(file.min_delta_days)
                .unwrap_or(defaults.temporal.min_delta_days),
        },
        stats_scope: scope,
    };
    if cfg.top_k == 0 || cfg.over_retrieve_factor == 0 {
        return Err(AppError::usage(
            "top_k and over_retrieve_factor must be >= 1",
        ));
    }
    cfg.temporal
        .validate()
        .map_err(|e| AppError::usage(e.to_string()))?;
    Ok(cfg)
}

fn load_index_for(
    index_path: &Path,
    corpus_path: &Path,
    dim: usize,
) -> Result<(timerank::Index, LexicalHashEncoder), AppError> {
    if dim == 0 {
        return Err(AppError::usage("--dim must be positive"));
    }
    let corpus = load_corpus(corpus_path).map_err(AppError::runtime)?;
    let encoder = LexicalHashEncoder::with_dimension(dim);
    let index = load_index(index_path, corpus, &encoder).map_err(AppError::runtime)?;
    Ok((index, encoder))
}

// ---------------------------------------------------------------------------
// search

fn cmd_search(args: SearchArgs) -> Result<(), AppError> {
    let mode = parse_mode(&args.mode)?;
    let timestamp =
        CivilDate::parse(&args.timestamp).map_err(|e| AppError::usage(e.to_string()))?;
    let cfg = resolve_config(&args.retrieval, mode)?;
    let (index, encoder) = load_index_for(&args.index, &args.corpus, args.retrieval.dim)?;
    let results = retrieve(&index, &args.question, timestamp, &cfg, &encoder);
    let json = serde_json::to_string_pretty(&results).map_err(AppError::runtime)?;
    println!("{json}");
    Ok(())
}

// ---------------------------------------------------------------------------
// eval

#[derive(Serialize)]
struct RunReport {
    schema_version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_at: Option<String>,
    config: RunConfigRecord,
    reports: Vec<EvalReport>,
}

/// Resolved run configuration embedded in every report for provenance.
#[derive(Serialize)]
struct RunConfigRecord {
    index: PathBuf,
    corpus: PathBuf,
    queries: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    predictions: Option<PathBuf>,
    dim: usize,
    compare: bool,
    retrieval: RetrievalConfig,
}

fn cmd_eval(args: EvalArgs) -> Result<(), AppError> {
    let mode = parse_mode(&args.mode)?;
    let cfg = resolve_config(&args.retrieval, mode)?;
    let (index, encoder) = load_index_for(&args.index, &args.corpus, args.retrieval.dim)?;
    let queries = load_queries(&args.queries).map_err(AppError::runtime)?;
    let predictions = match &args.predictions {
        Some(path) => Some(load_predictions(path).map_err(AppError::runtime)?),
        None => None,
    };

    let mut configs = Vec::new();
    if args.compare {
        configs.push(RetrievalConfig {
            mode: Mode::SemanticOnly,
            ..cfg.clone()
        });
        configs.push(RetrievalConfig {
            mode: Mode::Temporal,
            ..cfg.clone()
        });
    } else {
        configs.push(cfg.clone());
    }

    let mut reports = Vec::new();
    for c in &configs {
        let report =
            run_eval(&index, &queries, c, &encoder, predictions.as_ref()).map_err(AppError::runtime)?;
        reports.push(report);
    }

    print!("{}", render_report_table(&reports));

    if let Some(report_path) = &args.report {
        let run = RunReport {
            schema_version: REPORT_SCHEMA_VERSION,
            generated_at: if args.no_clock {
                None
            } else {
                Some(chrono::Utc::now().to_rfc3339())
            },
            config: RunConfigRecord {
                index: args.index.clone(),
                corpus: args.corpus.clone(),
                queries: args.queries.clone(),
                predictions: args.predictions.clone(),
                dim: args.retrieval.dim,
                compare: args.compare,
                retrieval: cfg,
            },
            reports,
        };
        let json = serde_json::to_string_pretty(&run).map_err(AppError::runtime)?;
        fs::write(report_path, json + "\n").map_err(AppError::runtime)?;
    }
    Ok(())
}
