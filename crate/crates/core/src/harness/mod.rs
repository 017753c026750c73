//! Experiment orchestration: a grid of (batch percent × run seed
//! [× category]) learning curves, stopping methods applied to each, and
//! the aggregate CSV.
//!
//! Output directory layout:
//!
//! ```text
//! <output>/experiment.cfg      resolved configuration
//! <output>/runs/<cell>.jsonl   one learning curve + its stop records per cell
//! <output>/aggregate.csv       written once every cell has finished
//! ```
//!
//! The aggregate is a pure fold over the stop records of the per-run logs,
//! so [`report`] over a directory filled by several sharded grid runs gives
//! the same bytes as a single unsharded run.

mod config;

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{
    generate_synthetic, load_newsgroups_with, read_cache_file, Corpus, CorpusError, Stopwords,
};
use crate::engine::{run_labeled, write_curve, ALConfig, EngineError, LearningCurve};
use crate::stopping::{Bv2009Params, OracleParams, StopDecision, StopMethod};

pub use config::{parse_pairs, DatasetSource, ExperimentConfig, TaskMode};

/// Environment variable holding the grid worker count.
pub const WORKERS_ENV: &str = "ALSTOP_WORKERS";
pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const RUNS_DIR: &str = "runs";
pub const CSV_COLUMNS: [&str; 9] = [
    "method",
    "batch_percent",
    "window_size",
    "n_decisions",
    "mean_annotations",
    "sd_annotations",
    "mean_f",
    "sd_f",
    "n_exhausted",
];

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("{cell}: {source}")]
    Engine {
        cell: String,
        #[source]
        source: EngineError,
    },
    #[error("{path}:{line}: {message}")]
    Log {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("no stop records found under {0}")]
    NoDecisions(PathBuf),
}

impl HarnessError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }
}

/// Loads the train/test pair named by a dataset source.
pub fn load_dataset(source: &DatasetSource) -> Result<(Corpus, Corpus), HarnessError> {
    Ok(match source {
        DatasetSource::Synthetic(p) => generate_synthetic(p)?,
        DatasetSource::Newsgroups {
            path,
            min_count,
            stopwords,
        } => {
            let stop = match stopwords {
                Some(file) => Stopwords::from_file(file)?,
                None => Stopwords::bundled(),
            };
            load_newsgroups_with(path, &stop, *min_count)?
        }
        DatasetSource::Cached(path) => read_cache_file(path)?,
    })
}

/// One learning curve of the grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub batch_percent: f64,
    pub run: usize,
    pub category: Option<usize>,
}

impl Cell {
    pub fn file_stem(&self) -> String {
        let mut s = format!("bp{}_run{:03}", self.batch_percent, self.run);
        if let Some(c) = self.category {
            s.push_str(&format!("_cat{c:03}"));
        }
        s
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "batch {}% run {}", self.batch_percent, self.run)?;
        if let Some(c) = self.category {
            write!(f, " category {c}")?;
        }
        Ok(())
    }
}

/// A stop decision tagged with the grid cell it came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub batch_percent: f64,
    pub run: usize,
    pub category: Option<usize>,
    pub decision: StopDecision,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum RunLogLine {
    Stop(DecisionRecord),
}

impl ExperimentConfig {
    /// Every cell in canonical order: batch percent, then run, then category.
    pub fn cells(&self, num_classes: usize) -> Vec<Cell> {
        let categories: Vec<Option<usize>> = match self.task {
            TaskMode::Multiclass => vec![None],
            TaskMode::PerCategory => (0..num_classes).map(Some).collect(),
        };
        let mut cells = Vec::new();
        for &batch_percent in &self.batch_percents {
            for run in 0..self.runs {
                for &category in &categories {
                    cells.push(Cell {
                        batch_percent,
                        run,
                        category,
                    });
                }
            }
        }
        cells
    }

    pub fn al_config(&self, cell: &Cell) -> ALConfig {
        let seed = self.base_seed.wrapping_add(cell.run as u64);
        ALConfig {
            batch_percent: cell.batch_percent,
            seed_size: self.seed_size,
            stop_set_size: Some(self.stop_set_size),
            sampler: self.sampler,
            seed,
            train: crate::linear_model::TrainConfig {
                shuffle_seed: seed,
                ..self.train.clone()
            },
        }
    }

    /// Oracle methods first, then BV2009 in configured window order.
    pub fn methods(&self) -> Vec<StopMethod> {
        let oracles = self
            .oracle_percents
            .iter()
            .map(|&percent| StopMethod::Oracle(OracleParams { percent }));
        let bvs = self.window_sizes.iter().map(|&window_size| {
            StopMethod::Bv2009(Bv2009Params {
                window_size,
                kappa_threshold: self.kappa_threshold,
            })
        });
        oracles.chain(bvs).collect()
    }
}

/// Applies every configured stopping method to one curve.
pub fn decide(methods: &[StopMethod], curve: &LearningCurve) -> Vec<StopDecision> {
    methods.iter().map(|m| m.apply(curve)).collect()
}

/// Writes a per-run log: the curve followed by one stop record per decision.
pub fn write_run_log<W: Write>(
    mut out: W,
    curve: &LearningCurve,
    records: &[DecisionRecord],
) -> std::io::Result<()> {
    write_curve(&mut out, curve)?;
    for r in records {
        serde_json::to_writer(&mut out, &RunLogLine::Stop(r.clone()))?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Reads the stop records of one per-run log.
pub fn read_stop_records(path: &Path) -> Result<Vec<DecisionRecord>, HarnessError> {
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| HarnessError::io(path, e))?;
        if !line.contains("\"record\":\"stop\"") {
            continue;
        }
        let RunLogLine::Stop(r) = serde_json::from_str(&line).map_err(|e| HarnessError::Log {
            path: path.to_owned(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(r);
    }
    Ok(out)
}

/// Restricts a grid run to every `count`-th cell starting at `index`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shard {
    pub index: usize,
    pub count: usize,
}

impl std::str::FromStr for Shard {
    type Err = String;

    /// Parses `INDEX/COUNT`, e.g. `0/2`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (i, n) = s.split_once('/').ok_or("expected INDEX/COUNT")?;
        let index: usize = i.trim().parse().map_err(|_| "bad shard index")?;
        let count: usize = n.trim().parse().map_err(|_| "bad shard count")?;
        if count == 0 || index >= count {
            return Err(format!("shard {index}/{count} out of range"));
        }
        Ok(Shard { index, count })
    }
}

#[derive(Clone, Debug, Default)]
pub struct GridOptions {
    pub shard: Option<Shard>,
    /// Worker threads; `None` reads [`WORKERS_ENV`], falling back to all cores.
    pub workers: Option<usize>,
}

pub fn worker_count_from_env() -> Option<usize> {
    std::env::var(WORKERS_ENV)
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
}

#[derive(Clone, Debug)]
pub struct GridOutcome {
    pub cells_run: usize,
    pub decisions: Vec<DecisionRecord>,
    /// `None` for sharded runs; use [`report`] once all shards are done.
    pub rows: Option<Vec<AggregateRow>>,
}

/// Runs the experiment grid and writes per-run logs and, unless sharded, the
/// aggregate CSV.
pub fn run_grid(cfg: &ExperimentConfig, opts: &GridOptions) -> Result<GridOutcome, HarnessError> {
    cfg.validate()?;
    let (train, test) = load_dataset(&cfg.source)?;
    let runs_dir = cfg.output.join(RUNS_DIR);
    fs::create_dir_all(&runs_dir).map_err(|e| HarnessError::io(&runs_dir, e))?;
    let cfg_path = cfg.output.join("experiment.cfg");
    fs::write(&cfg_path, cfg.to_text()).map_err(|e| HarnessError::io(&cfg_path, e))?;

    let tasks: Vec<Arc<(Corpus, Corpus)>> = match cfg.task {
        TaskMode::Multiclass => vec![Arc::new((train, test))],
        TaskMode::PerCategory => (0..train.num_classes())
            .map(|c| Arc::new((train.binarize(c), test.binarize(c))))
            .collect(),
    };
    let cells: Vec<Cell> = cfg
        .cells(tasks.len())
        .into_iter()
        .enumerate()
        .filter(|(i, _)| opts.shard.is_none_or(|s| i % s.count == s.index))
        .map(|(_, c)| c)
        .collect();
    let methods = cfg.methods();

    let workers = opts.workers.or_else(worker_count_from_env).unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Config(format!("worker pool: {e}")))?;
    log::info!(
        "running {} grid cells on {} workers",
        cells.len(),
        pool.current_num_threads()
    );

    let per_cell: Vec<Vec<DecisionRecord>> = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| {
                let task = &tasks[cell.category.unwrap_or(0)];
                let label = match cell.category {
                    None => cfg.task.as_str().to_owned(),
                    Some(c) => format!("category {c}: {}", task.0.class_names[1]),
                };
                let curve = run_labeled(&task.0, &task.1, &cfg.al_config(cell), &label).map_err(
                    |source| HarnessError::Engine {
                        cell: cell.to_string(),
                        source,
                    },
                )?;
                let records: Vec<DecisionRecord> = decide(&methods, &curve)
                    .into_iter()
                    .map(|decision| DecisionRecord {
                        batch_percent: cell.batch_percent,
                        run: cell.run,
                        category: cell.category,
                        decision,
                    })
                    .collect();
                let path = runs_dir.join(format!("{}.jsonl", cell.file_stem()));
                let file = File::create(&path).map_err(|e| HarnessError::io(&path, e))?;
                write_run_log(BufWriter::new(file), &curve, &records)
                    .map_err(|e| HarnessError::io(&path, e))?;
                log::info!("{cell}: {} iterations", curve.len());
                Ok(records)
            })
            .collect::<Result<_, HarnessError>>()
    })?;
    let decisions: Vec<DecisionRecord> = per_cell.into_iter().flatten().collect();

    let rows = if opts.shard.is_none() {
        let rows = aggregate(&decisions);
        write_aggregate_csv(&cfg.output.join(AGGREGATE_FILE), &rows)?;
        Some(rows)
    } else {
        None
    };
    Ok(GridOutcome {
        cells_run: cells.len(),
        decisions,
        rows,
    })
}

/// Re-aggregates every per-run log under `output/runs` and rewrites
/// `output/aggregate.csv`.
pub fn report(output: &Path) -> Result<Vec<AggregateRow>, HarnessError> {
    let runs_dir = output.join(RUNS_DIR);
    let mut logs: Vec<PathBuf> = fs::read_dir(&runs_dir)
        .map_err(|e| HarnessError::io(&runs_dir, e))?
        .map(|e| {
            e.map(|e| e.path())
                .map_err(|err| HarnessError::io(&runs_dir, err))
        })
        .collect::<Result<_, _>>()?;
    logs.retain(|p| p.extension().is_some_and(|e| e == "jsonl"));
    logs.sort();
    let mut decisions = Vec::new();
    for path in &logs {
        decisions.extend(read_stop_records(path)?);
    }
    if decisions.is_empty() {
        return Err(HarnessError::NoDecisions(runs_dir));
    }
    let rows = aggregate(&decisions);
    write_aggregate_csv(&output.join(AGGREGATE_FILE), &rows)?;
    Ok(rows)
}

/// Mean and spread of stop decisions for one (method, batch percent) cell of
/// the results table.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub method: String,
    pub batch_percent: f64,
    pub window_size: Option<usize>,
    pub n_decisions: usize,
    pub mean_annotations: f64,
    pub sd_annotations: f64,
    pub mean_f: f64,
    pub sd_f: f64,
    pub n_exhausted: usize,
}

fn method_order(a: &StopMethod, b: &StopMethod) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    match (a, b) {
        (StopMethod::Oracle(x), StopMethod::Oracle(y)) => x.percent.total_cmp(&y.percent),
        (StopMethod::Oracle(_), StopMethod::Bv2009(_)) => Ordering::Less,
        (StopMethod::Bv2009(_), StopMethod::Oracle(_)) => Ordering::Greater,
        (StopMethod::Bv2009(x), StopMethod::Bv2009(y)) => y
            .window_size
            .cmp(&x.window_size)
            .then(x.kappa_threshold.total_cmp(&y.kappa_threshold)),
    }
}

fn record_order(a: &DecisionRecord, b: &DecisionRecord) -> std::cmp::Ordering {
    method_order(&a.decision.method, &b.decision.method)
        .then(a.batch_percent.total_cmp(&b.batch_percent))
        .then(a.run.cmp(&b.run))
        .then(a.category.cmp(&b.category))
}

/// `(mean, sample standard deviation)`, with the mean clamped into the data
/// range.
fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = mean.clamp(lo, hi);
    let sd = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    (mean, sd)
}

/// Groups decisions by (method, batch percent) and summarizes each group.
/// The result does not depend on the input order.
pub fn aggregate(decisions: &[DecisionRecord]) -> Vec<AggregateRow> {
    let mut sorted: Vec<&DecisionRecord> = decisions.iter().collect();
    sorted.sort_by(|a, b| record_order(a, b));
    let same_group = |a: &DecisionRecord, b: &DecisionRecord| {
        method_order(&a.decision.method, &b.decision.method).is_eq()
            && a.decision.method.label() == b.decision.method.label()
            && a.batch_percent.total_cmp(&b.batch_percent).is_eq()
    };
    sorted
        .chunk_by(|a, b| same_group(a, b))
        .map(|group| {
            let first = group[0];
            let ann: Vec<f64> = group
                .iter()
                .map(|r| r.decision.annotations as f64)
                .collect();
            let f: Vec<f64> = group.iter().map(|r| r.decision.f_measure).collect();
            let (mean_annotations, sd_annotations) = mean_sd(&ann);
            let (mean_f, sd_f) = mean_sd(&f);
            AggregateRow {
                method: first.decision.method.label(),
                batch_percent: first.batch_percent,
                window_size: first.decision.method.window_size(),
                n_decisions: group.len(),
                mean_annotations,
                sd_annotations,
                mean_f,
                sd_f,
                n_exhausted: group.iter().filter(|r| r.decision.exhausted).count(),
            }
        })
        .collect()
}

pub fn write_aggregate<W: Write>(out: W, rows: &[AggregateRow]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.method.clone(),
            r.batch_percent.to_string(),
            r.window_size.map(|n| n.to_string()).unwrap_or_default(),
            r.n_decisions.to_string(),
            format!("{:.4}", r.mean_annotations),
            format!("{:.4}", r.sd_annotations),
            format!("{:.6}", r.mean_f),
            format!("{:.6}", r.sd_f),
            r.n_exhausted.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_aggregate_csv(path: &Path, rows: &[AggregateRow]) -> Result<(), HarnessError> {
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    write_aggregate(file, rows).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => HarnessError::io(path, source),
        other => HarnessError::Config(format!("csv: {other:?}")),
    })
}

/// Renders rows as a methods × batch-percent text table with mean
/// annotations over mean F in each cell.
pub fn render_table(rows: &[AggregateRow]) -> String {
    let mut percents: Vec<f64> = rows.iter().map(|r| r.batch_percent).collect();
    percents.sort_by(f64::total_cmp);
    percents.dedup();
    let mut methods: Vec<(String, Option<usize>)> = Vec::new();
    for r in rows {
        let key = (r.method.clone(), r.window_size);
        if !methods.contains(&key) {
            methods.push(key);
        }
    }
    let name = |(m, w): &(String, Option<usize>)| match w {
        Some(w) => format!("{m} (window {w})"),
        None => m.clone(),
    };
    let width = methods
        .iter()
        .map(|m| name(m).len())
        .max()
        .unwrap_or(6)
        .max(6);
    let mut s = format!("{:width$}", "method");
    for p in &percents {
        s.push_str(&format!(" | {:>12}", format!("{p}%")));
    }
    s.push('\n');
    for m in &methods {
        let cell = |p: &f64| {
            rows.iter()
                .find(|r| r.method == m.0 && r.window_size == m.1 && r.batch_percent == *p)
        };
        s.push_str(&format!("{:width$}", name(m)));
        for p in &percents {
            let v = cell(p)
                .map(|r| format!("{:.2}", r.mean_annotations))
                .unwrap_or_default();
            s.push_str(&format!(" | {v:>12}"));
        }
        s.push('\n');
        s.push_str(&format!("{:width$}", ""));
        for p in &percents {
            let v = cell(p)
                .map(|r| format!("{:.2}", 100.0 * r.mean_f))
                .unwrap_or_default();
            s.push_str(&format!(" | {v:>12}"));
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::SyntheticParams;

    fn record(
        method: StopMethod,
        bp: f64,
        run: usize,
        ann: usize,
        f: f64,
        exhausted: bool,
    ) -> DecisionRecord {
        DecisionRecord {
            batch_percent: bp,
            run,
            category: None,
            decision: StopDecision {
                method,
                stop_iteration: (!exhausted).then_some(0),
                exhausted,
                annotations: ann,
                f_measure: f,
            },
        }
    }

    fn oracle() -> StopMethod {
        StopMethod::Oracle(OracleParams { percent: 99.0 })
    }

    fn bv(n: usize) -> StopMethod {
        StopMethod::Bv2009(Bv2009Params {
            window_size: n,
            kappa_threshold: 0.99,
        })
    }

    #[test]
    fn aggregate_groups_and_orders_rows() {
        let recs = vec![
            record(bv(1), 5.0, 0, 100, 0.7, false),
            record(bv(3), 5.0, 0, 300, 0.8, true),
            record(oracle(), 5.0, 1, 50, 0.6, false),
            record(oracle(), 1.0, 0, 10, 0.5, false),
            record(oracle(), 5.0, 0, 70, 0.8, false),
        ];
        let rows = aggregate(&recs);
        let keys: Vec<(String, f64, Option<usize>)> = rows
            .iter()
            .map(|r| (r.method.clone(), r.batch_percent, r.window_size))
            .collect();
        assert_eq!(
            keys,
            vec![
                ("Oracle-99".into(), 1.0, None),
                ("Oracle-99".into(), 5.0, None),
                ("BV2009".into(), 5.0, Some(3)),
                ("BV2009".into(), 5.0, Some(1)),
            ]
        );
        let o5 = &rows[1];
        assert_eq!(o5.n_decisions, 2);
        assert_eq!(o5.mean_annotations, 60.0);
        assert!((o5.sd_annotations - 200f64.sqrt()).abs() < 1e-12);
        assert!((o5.mean_f - 0.7).abs() < 1e-12);
        assert_eq!(rows[2].n_exhausted, 1);
        assert_eq!(rows[0].sd_f, 0.0);

        let mut reversed = recs.clone();
        reversed.reverse();
        assert_eq!(aggregate(&reversed), rows);
    }

    #[test]
    fn mean_stays_within_range() {
        let v = vec![0.1 + 0.2; 7];
        let (m, sd) = mean_sd(&v);
        assert_eq!(m, 0.1 + 0.2);
        assert!(sd < 1e-15);
    }

    #[test]
    fn csv_layout() {
        let rows = aggregate(&[
            record(oracle(), 1.0, 0, 10, 0.5, false),
            record(bv(3), 2.5, 0, 20, 0.25, false),
        ]);
        let mut buf = Vec::new();
        write_aggregate(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "method,batch_percent,window_size,n_decisions,mean_annotations,sd_annotations,mean_f,sd_f,n_exhausted\n\
             Oracle-99,1,,1,10.0000,0.0000,0.500000,0.000000,0\n\
             BV2009,2.5,3,1,20.0000,0.0000,0.250000,0.000000,0\n"
        );
        let table = render_table(&rows);
        assert!(table.contains("BV2009 (window 3)"));
        assert!(table.contains("50.00"));
    }

    #[test]
    fn shard_parsing() {
        assert_eq!("1/3".parse::<Shard>(), Ok(Shard { index: 1, count: 3 }));
        assert!("3/3".parse::<Shard>().is_err());
        assert!("0/0".parse::<Shard>().is_err());
        assert!("x".parse::<Shard>().is_err());
    }

    #[test]
    fn cells_and_seeds() {
        let mut cfg = ExperimentConfig {
            runs: 2,
            batch_percents: vec![5.0, 10.0],
            base_seed: 40,
            ..Default::default()
        };
        let cells = cfg.cells(3);
        assert_eq!(cells.len(), 4);
        assert_eq!(cfg.al_config(&cells[3]).seed, 41);
        assert_eq!(cells[3].file_stem(), "bp10_run001");
        cfg.task = TaskMode::PerCategory;
        let cells = cfg.cells(3);
        assert_eq!(cells.len(), 12);
        assert_eq!(cells[1].file_stem(), "bp5_run000_cat001");
        let methods = cfg.methods();
        assert_eq!(methods.len(), 3);
        assert_eq!(methods[0].label(), "Oracle-99");
    }

    #[test]
    fn tiny_grid_counts_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            source: DatasetSource::Synthetic(SyntheticParams {
                docs: 100,
                vocab_size: 60,
                skew: 0.4,
                ..Default::default()
            }),
            batch_percents: vec![10.0],
            window_sizes: vec![1],
            runs: 1,
            output: dir.path().to_owned(),
            ..Default::default()
        };
        let out = run_grid(&cfg, &GridOptions::default()).unwrap();
        assert_eq!(out.cells_run, 1);
        assert_eq!(out.decisions.len(), 2);
        assert_eq!(out.rows.as_ref().unwrap().len(), 2);
        let logs: Vec<_> = fs::read_dir(dir.path().join(RUNS_DIR)).unwrap().collect();
        assert_eq!(logs.len(), 1);
        let before = fs::read(dir.path().join(AGGREGATE_FILE)).unwrap();
        report(dir.path()).unwrap();
        assert_eq!(fs::read(dir.path().join(AGGREGATE_FILE)).unwrap(), before);
    }
}
