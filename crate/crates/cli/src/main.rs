use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use alstop::corpus::{
    generate_synthetic, load_newsgroups_with, write_cache_file, Stopwords, SyntheticParams,
};
use alstop::engine::run_labeled;
use alstop::harness::{
    decide, load_dataset, render_table, report, run_grid, write_run_log, Cell, DecisionRecord,
    ExperimentConfig, GridOptions, Shard, WORKERS_ENV,
};
use anyhow::Context;
use clap::{Args, Parser, Subcommand};

/// Simulate pool-based active learning and evaluate stopping methods.
#[derive(Parser)]
#[command(name = "alstop", version, about, long_about = None)]
#[command(after_help = format!("Environment:\n  {WORKERS_ENV}  number of grid worker threads (default: all cores)\n  RUST_LOG        log filter, e.g. info"))]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus and write it as a cached corpus file
    Synth(SynthArgs),
    /// Read a 20news-bydate tree and write it as a cached corpus file
    Ingest(IngestArgs),
    /// Run a single active learning curve and print its log
    Run(RunArgs),
    /// Run the full batch-percent × run grid and write the aggregate CSV
    Grid(GridArgs),
    /// Re-aggregate the per-run logs of an output directory
    Report(ReportArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Number of classes
    #[arg(long, default_value_t = 2)]
    classes: usize,
    /// Vocabulary size
    #[arg(long, default_value_t = 500)]
    vocab_size: usize,
    /// Total documents (split 80/20 into train/test per class)
    #[arg(long, default_value_t = 2000)]
    docs: usize,
    /// Tokens drawn per document
    #[arg(long, default_value_t = 20)]
    doc_len: usize,
    /// Probability of drawing a token from the class's own word block, in [0, 1]
    #[arg(long, default_value_t = 0.3)]
    skew: f64,
    /// Random seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output corpus file
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct IngestArgs {
    /// Root of the 20news-bydate tree (containing train/ and test/)
    newsgroups: PathBuf,
    /// Stopword file, one word per line (default: bundled English list)
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Minimum total train-split count for a term to be kept
    #[arg(long, default_value_t = 4)]
    min_count: u64,
    /// Output corpus file
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment config file (flat `key = value` lines)
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set synth.skew=0.2`; may repeat
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Read the dataset from a cached corpus file
    #[arg(long, conflicts_with = "newsgroups")]
    corpus: Option<PathBuf>,
    /// Read the dataset from a 20news-bydate tree
    #[arg(long)]
    newsgroups: Option<PathBuf>,
    /// Task mode: multiclass or per-category
    #[arg(long)]
    task: Option<String>,
    /// Kappa threshold for BV2009
    #[arg(long)]
    kappa_threshold: Option<f64>,
    /// Comma-separated BV2009 window sizes
    #[arg(long)]
    window_sizes: Option<String>,
    /// Comma-separated Oracle percents
    #[arg(long)]
    oracle_percents: Option<String>,
    /// Stop set size (capped at the pool size)
    #[arg(long)]
    stop_set_size: Option<usize>,
    /// Base random seed; run i uses seed + i
    #[arg(long)]
    seed: Option<u64>,
}

/// Marks an error caused by bad flags or config values rather than a failure
/// while running.
#[derive(Debug)]
struct UsageError(anyhow::Error);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage<T>(r: anyhow::Result<T>) -> anyhow::Result<T> {
    r.map_err(|e| UsageError(e).into())
}

impl ConfigArgs {
    fn resolve(&self) -> anyhow::Result<ExperimentConfig> {
        usage(self.resolve_inner())
    }

    fn resolve_inner(&self) -> anyhow::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        let mut set = |k: &str, v: String| cfg.set(k, &v).with_context(|| format!("--{k}"));
        if let Some(p) = &self.corpus {
            set("dataset", "cached".into())?;
            set("dataset.path", p.display().to_string())?;
        }
        if let Some(p) = &self.newsgroups {
            set("dataset", "newsgroups".into())?;
            set("dataset.path", p.display().to_string())?;
        }
        if let Some(v) = &self.task {
            set("task", v.clone())?;
        }
        if let Some(v) = self.kappa_threshold {
            set("kappa_threshold", v.to_string())?;
        }
        if let Some(v) = &self.window_sizes {
            set("window_sizes", v.clone())?;
        }
        if let Some(v) = &self.oracle_percents {
            set("oracle_percents", v.clone())?;
        }
        if let Some(v) = self.stop_set_size {
            set("stop_set_size", v.to_string())?;
        }
        if let Some(v) = self.seed {
            set("seed", v.to_string())?;
        }
        for o in &self.overrides {
            let (k, v) = o
                .split_once('=')
                .with_context(|| format!("--set expects KEY=VALUE, got `{o}`"))?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Batch size as a percent of the pool
    #[arg(long, default_value_t = 1.0)]
    batch_percent: f64,
    /// Run the binary task "this category vs. the rest" instead of the full task
    #[arg(long)]
    category: Option<usize>,
    /// Write the run log here instead of stdout
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Comma-separated batch percents
    #[arg(long)]
    batch_percents: Option<String>,
    /// Seeded runs per batch percent
    #[arg(long)]
    runs: Option<usize>,
    /// Output directory
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Only run cells i, i+N, i+2N, ... (format I/N); aggregate later with `report`
    #[arg(long)]
    shard: Option<Shard>,
}

#[derive(Args)]
struct ReportArgs {
    /// Grid output directory containing runs/
    output: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(if e.is::<UsageError>() { 2 } else { 1 })
        }
    }
}

/// Joins the error chain, skipping causes already quoted by their parent.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if !out.contains(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
    }
    out
}

fn execute(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Synth(a) => {
            let params = SyntheticParams {
                classes: a.classes,
                vocab_size: a.vocab_size,
                docs: a.docs,
                doc_len: a.doc_len,
                skew: a.skew,
                seed: a.seed,
            };
            let (train, test) = generate_synthetic(&params)?;
            write_cache_file(&a.out, &train, &test)?;
            eprintln!(
                "wrote {} train / {} test docs, {} features to {}",
                train.len(),
                test.len(),
                train.num_features(),
                a.out.display()
            );
        }
        Command::Ingest(a) => {
            let stop = match &a.stopwords {
                Some(p) => Stopwords::from_file(p)?,
                None => Stopwords::bundled(),
            };
            let (train, test) = load_newsgroups_with(&a.newsgroups, &stop, a.min_count)?;
            write_cache_file(&a.out, &train, &test)?;
            eprintln!(
                "wrote {} train / {} test docs, {} classes, {} features to {}",
                train.len(),
                test.len(),
                train.num_classes(),
                train.num_features(),
                a.out.display()
            );
        }
        Command::Run(a) => {
            let mut cfg = a.config.resolve()?;
            cfg.batch_percents = vec![a.batch_percent];
            cfg.runs = 1;
            usage(cfg.validate().map_err(Into::into))?;
            let (mut train, mut test) = load_dataset(&cfg.source)?;
            let mut label = cfg.task.as_str().to_owned();
            if let Some(c) = a.category {
                anyhow::ensure!(
                    c < train.num_classes(),
                    "category {c} out of range (corpus has {} classes)",
                    train.num_classes()
                );
                train = train.binarize(c);
                test = test.binarize(c);
                label = format!("category {c}: {}", train.class_names[1]);
            }
            let cell = Cell {
                batch_percent: a.batch_percent,
                run: 0,
                category: a.category,
            };
            let curve = run_labeled(&train, &test, &cfg.al_config(&cell), &label)?;
            let records: Vec<DecisionRecord> = decide(&cfg.methods(), &curve)
                .into_iter()
                .map(|decision| DecisionRecord {
                    batch_percent: a.batch_percent,
                    run: 0,
                    category: a.category,
                    decision,
                })
                .collect();
            match &a.out {
                Some(path) => {
                    let file = File::create(path).with_context(|| path.display().to_string())?;
                    write_run_log(BufWriter::new(file), &curve, &records)?;
                }
                None => write_run_log(io::stdout().lock(), &curve, &records)?,
            }
            for r in &records {
                let d = &r.decision;
                match d.stop_iteration {
                    Some(t) => eprintln!(
                        "{}: stop at iteration {t}, {} annotations, F = {:.4}",
                        d.method, d.annotations, d.f_measure
                    ),
                    None => eprintln!(
                        "{}: never stopped (F = {:.4} at exhaustion)",
                        d.method, d.f_measure
                    ),
                }
            }
        }
        Command::Grid(a) => {
            let mut cfg = a.config.resolve()?;
            if let Some(v) = &a.batch_percents {
                usage(cfg.set("batch_percents", v).context("--batch-percents"))?;
            }
            if let Some(v) = a.runs {
                usage(cfg.set("runs", &v.to_string()).context("--runs"))?;
            }
            if let Some(v) = &a.output {
                cfg.output = v.clone();
            }
            usage(cfg.validate().map_err(Into::into))?;
            let opts = GridOptions {
                shard: a.shard,
                workers: None,
            };
            let outcome = run_grid(&cfg, &opts)?;
            match outcome.rows {
                Some(rows) => {
                    let mut out = io::stdout().lock();
                    writeln!(out, "{}", render_table(&rows))?;
                    eprintln!(
                        "{} curves; aggregate written to {}",
                        outcome.cells_run,
                        cfg.output.join(alstop::harness::AGGREGATE_FILE).display()
                    );
                }
                None => eprintln!(
                    "{} curves written under {}; run `alstop report` once all shards finish",
                    outcome.cells_run,
                    cfg.output.display()
                ),
            }
        }
        Command::Report(a) => {
            let rows = report(&a.output)?;
            println!("{}", render_table(&rows));
        }
    }
    Ok(())
}
