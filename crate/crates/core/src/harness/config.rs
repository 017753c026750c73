//! Flat `key = value` experiment configuration.
//!
//! Blank lines and `#` comments are ignored. Keys:
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `dataset` | `synthetic` | `synthetic`, `newsgroups` or `cached` |
//! | `dataset.path` | | 20news-bydate root or cached corpus file |
//! | `newsgroups.min_count` | `4` | minimum train-split token count |
//! | `newsgroups.stopwords` | bundled list | stopword file |
//! | `synth.classes` / `synth.vocab_size` / `synth.docs` / `synth.doc_len` / `synth.skew` / `synth.seed` | `2` / `500` / `2000` / `20` / `0.3` / `0` | synthetic corpus |
//! | `task` | `multiclass` | `multiclass` or `per-category` |
//! | `batch_percents` | `1,5,10` | comma-separated |
//! | `window_sizes` | `3,1` | comma-separated |
//! | `oracle_percents` | `99` | comma-separated |
//! | `kappa_threshold` | `0.99` | |
//! | `stop_set_size` | `2000` | capped at the pool size |
//! | `seed_size` | `batch` | `batch` or a document count |
//! | `sampler` | `closest` | `closest` or `random` |
//! | `runs` | `10` | seeded repetitions per batch percent |
//! | `seed` | `0` | run `i` uses seed `seed + i` |
//! | `svm.c` / `svm.tol` / `svm.max_epochs` | `1` / `0.001` / `1000` | learner |
//! | `output` | `results` | output directory |

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::corpus::{SyntheticParams, DEFAULT_MIN_COUNT};
use crate::engine::{Sampler, SeedSize, DEFAULT_STOP_SET_CAP};
use crate::linear_model::TrainConfig;
use crate::stopping::{
    Bv2009Params, OracleParams, DEFAULT_KAPPA_THRESHOLD, DEFAULT_ORACLE_PERCENT,
};

use super::HarnessError;

#[derive(Clone, Debug, PartialEq)]
pub enum DatasetSource {
    Synthetic(SyntheticParams),
    Newsgroups {
        path: PathBuf,
        min_count: u64,
        stopwords: Option<PathBuf>,
    },
    Cached(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TaskMode {
    Multiclass,
    /// One binary one-vs-rest task per category.
    PerCategory,
}

impl TaskMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskMode::Multiclass => "multiclass",
            TaskMode::PerCategory => "per-category",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub source: DatasetSource,
    pub task: TaskMode,
    pub batch_percents: Vec<f64>,
    pub window_sizes: Vec<usize>,
    pub oracle_percents: Vec<f64>,
    pub kappa_threshold: f64,
    pub stop_set_size: usize,
    pub seed_size: SeedSize,
    pub sampler: Sampler,
    pub runs: usize,
    pub base_seed: u64,
    pub train: TrainConfig,
    pub output: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            source: DatasetSource::Synthetic(SyntheticParams::default()),
            task: TaskMode::Multiclass,
            batch_percents: vec![1.0, 5.0, 10.0],
            window_sizes: vec![3, 1],
            oracle_percents: vec![DEFAULT_ORACLE_PERCENT],
            kappa_threshold: DEFAULT_KAPPA_THRESHOLD,
            stop_set_size: DEFAULT_STOP_SET_CAP,
            seed_size: SeedSize::OneBatch,
            sampler: Sampler::Closest,
            runs: 10,
            base_seed: 0,
            train: TrainConfig::default(),
            output: PathBuf::from("results"),
        }
    }
}

fn config_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, HarnessError> {
    value
        .trim()
        .parse()
        .map_err(|_| config_err(format!("{key}: cannot parse `{value}`")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, HarnessError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| parse_value(key, v))
        .collect()
}

/// Splits config text into `(key, value)` pairs.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, HarnessError> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| config_err(format!("line {}: expected `key = value`", i + 1)))?;
        pairs.push((k.trim().to_owned(), v.trim().to_owned()));
    }
    Ok(pairs)
}

impl ExperimentConfig {
    pub fn from_text(text: &str) -> Result<Self, HarnessError> {
        let mut cfg = ExperimentConfig::default();
        for (k, v) in parse_pairs(text)? {
            cfg.set(&k, &v)?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let mut cfg = Self::from_text(&text)?;
        // relative dataset paths are resolved against the config file
        let base = path.parent().unwrap_or(Path::new(""));
        match &mut cfg.source {
            DatasetSource::Newsgroups {
                path, stopwords, ..
            } => {
                *path = base.join(&*path);
                if let Some(s) = stopwords {
                    *s = base.join(&*s);
                }
            }
            DatasetSource::Cached(path) => *path = base.join(&*path),
            DatasetSource::Synthetic(_) => {}
        }
        Ok(cfg)
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), HarnessError> {
        match key {
            "dataset" => {
                let path = self.dataset_path().unwrap_or_default();
                self.source = match value {
                    "synthetic" => DatasetSource::Synthetic(match &self.source {
                        DatasetSource::Synthetic(p) => p.clone(),
                        _ => SyntheticParams::default(),
                    }),
                    "newsgroups" => DatasetSource::Newsgroups {
                        path,
                        min_count: DEFAULT_MIN_COUNT,
                        stopwords: None,
                    },
                    "cached" => DatasetSource::Cached(path),
                    other => return Err(config_err(format!("dataset: unknown kind `{other}`"))),
                }
            }
            "dataset.path" => match &mut self.source {
                DatasetSource::Newsgroups { path, .. } | DatasetSource::Cached(path) => {
                    *path = PathBuf::from(value)
                }
                DatasetSource::Synthetic(_) => {
                    return Err(config_err(
                        "dataset.path needs dataset = newsgroups or cached first",
                    ))
                }
            },
            "newsgroups.min_count" | "newsgroups.stopwords" => {
                let DatasetSource::Newsgroups {
                    min_count,
                    stopwords,
                    ..
                } = &mut self.source
                else {
                    return Err(config_err(format!(
                        "{key} needs dataset = newsgroups first"
                    )));
                };
                if key.ends_with("min_count") {
                    *min_count = parse_value(key, value)?;
                } else {
                    *stopwords = Some(PathBuf::from(value));
                }
            }
            "synth.classes" => self.synth_params().classes = parse_value(key, value)?,
            "synth.vocab_size" => self.synth_params().vocab_size = parse_value(key, value)?,
            "synth.docs" => self.synth_params().docs = parse_value(key, value)?,
            "synth.doc_len" => self.synth_params().doc_len = parse_value(key, value)?,
            "synth.skew" => self.synth_params().skew = parse_value(key, value)?,
            "synth.seed" => self.synth_params().seed = parse_value(key, value)?,
            "task" => {
                self.task = match value {
                    "multiclass" => TaskMode::Multiclass,
                    "per-category" => TaskMode::PerCategory,
                    other => return Err(config_err(format!("task: unknown mode `{other}`"))),
                }
            }
            "batch_percents" => self.batch_percents = parse_list(key, value)?,
            "window_sizes" => self.window_sizes = parse_list(key, value)?,
            "oracle_percents" => self.oracle_percents = parse_list(key, value)?,
            "kappa_threshold" => self.kappa_threshold = parse_value(key, value)?,
            "stop_set_size" => self.stop_set_size = parse_value(key, value)?,
            "seed_size" => {
                self.seed_size = match value {
                    "batch" => SeedSize::OneBatch,
                    n => SeedSize::Fixed(parse_value(key, n)?),
                }
            }
            "sampler" => {
                self.sampler = match value {
                    "closest" => Sampler::Closest,
                    "random" => Sampler::Random,
                    other => return Err(config_err(format!("sampler: unknown sampler `{other}`"))),
                }
            }
            "runs" => self.runs = parse_value(key, value)?,
            "seed" => self.base_seed = parse_value(key, value)?,
            "svm.c" => self.train.c = parse_value(key, value)?,
            "svm.tol" => self.train.tol = parse_value(key, value)?,
            "svm.max_epochs" => self.train.max_epochs = parse_value(key, value)?,
            "output" => self.output = PathBuf::from(value),
            other => return Err(config_err(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    fn synth_params(&mut self) -> &mut SyntheticParams {
        if !matches!(self.source, DatasetSource::Synthetic(_)) {
            self.source = DatasetSource::Synthetic(SyntheticParams::default());
        }
        match &mut self.source {
            DatasetSource::Synthetic(p) => p,
            _ => unreachable!(),
        }
    }

    fn dataset_path(&self) -> Option<PathBuf> {
        match &self.source {
            DatasetSource::Newsgroups { path, .. } | DatasetSource::Cached(path) => {
                Some(path.clone())
            }
            DatasetSource::Synthetic(_) => None,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.batch_percents.is_empty() {
            return Err(config_err("batch_percents is empty"));
        }
        if self.window_sizes.is_empty() {
            return Err(config_err("window_sizes is empty"));
        }
        if self.oracle_percents.is_empty() {
            return Err(config_err("oracle_percents is empty"));
        }
        if self.runs == 0 {
            return Err(config_err("runs must be at least 1"));
        }
        if self.stop_set_size == 0 {
            return Err(config_err("stop_set_size must be at least 1"));
        }
        if let Some(p) = self
            .batch_percents
            .iter()
            .find(|p| !(**p > 0.0 && **p <= 100.0))
        {
            return Err(config_err(format!("batch percent {p} outside (0, 100]")));
        }
        for w in &self.window_sizes {
            Bv2009Params::new(*w, self.kappa_threshold).map_err(|e| config_err(e.to_string()))?;
        }
        for p in &self.oracle_percents {
            OracleParams::new(*p).map_err(|e| config_err(e.to_string()))?;
        }
        self.train
            .validate()
            .map_err(|e| config_err(e.to_string()))?;
        if let DatasetSource::Newsgroups { path, .. } | DatasetSource::Cached(path) = &self.source {
            if path.as_os_str().is_empty() {
                return Err(config_err("dataset.path is required"));
            }
        }
        Ok(())
    }

    /// Renders the config back into the file format; parsing the result
    /// yields an equal config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let join = |v: &[String]| v.join(", ");
        match &self.source {
            DatasetSource::Synthetic(p) => {
                let _ = writeln!(s, "dataset = synthetic");
                let _ = writeln!(s, "synth.classes = {}", p.classes);
                let _ = writeln!(s, "synth.vocab_size = {}", p.vocab_size);
                let _ = writeln!(s, "synth.docs = {}", p.docs);
                let _ = writeln!(s, "synth.doc_len = {}", p.doc_len);
                let _ = writeln!(s, "synth.skew = {}", p.skew);
                let _ = writeln!(s, "synth.seed = {}", p.seed);
            }
            DatasetSource::Newsgroups {
                path,
                min_count,
                stopwords,
            } => {
                let _ = writeln!(s, "dataset = newsgroups");
                let _ = writeln!(s, "dataset.path = {}", path.display());
                let _ = writeln!(s, "newsgroups.min_count = {min_count}");
                if let Some(sw) = stopwords {
                    let _ = writeln!(s, "newsgroups.stopwords = {}", sw.display());
                }
            }
            DatasetSource::Cached(path) => {
                let _ = writeln!(s, "dataset = cached");
                let _ = writeln!(s, "dataset.path = {}", path.display());
            }
        }
        let _ = writeln!(s, "task = {}", self.task.as_str());
        let _ = writeln!(
            s,
            "batch_percents = {}",
            join(
                &self
                    .batch_percents
                    .iter()
                    .map(f64::to_string)
                    .collect::<Vec<_>>()
            )
        );
        let _ = writeln!(
            s,
            "window_sizes = {}",
            join(
                &self
                    .window_sizes
                    .iter()
                    .map(usize::to_string)
                    .collect::<Vec<_>>()
            )
        );
        let _ = writeln!(
            s,
            "oracle_percents = {}",
            join(
                &self
                    .oracle_percents
                    .iter()
                    .map(f64::to_string)
                    .collect::<Vec<_>>()
            )
        );
        let _ = writeln!(s, "kappa_threshold = {}", self.kappa_threshold);
        let _ = writeln!(s, "stop_set_size = {}", self.stop_set_size);
        let _ = writeln!(
            s,
            "seed_size = {}",
            match self.seed_size {
                SeedSize::OneBatch => "batch".to_owned(),
                SeedSize::Fixed(n) => n.to_string(),
            }
        );
        let _ = writeln!(
            s,
            "sampler = {}",
            match self.sampler {
                Sampler::Closest => "closest",
                Sampler::Random => "random",
            }
        );
        let _ = writeln!(s, "runs = {}", self.runs);
        let _ = writeln!(s, "seed = {}", self.base_seed);
        let _ = writeln!(s, "svm.c = {}", self.train.c);
        let _ = writeln!(s, "svm.tol = {}", self.train.tol);
        let _ = writeln!(s, "svm.max_epochs = {}", self.train.max_epochs);
        let _ = writeln!(s, "output = {}", self.output.display());
        s
    }
}
