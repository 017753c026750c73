//! The simulated active learning loop.
//!
//! A run starts from a random seed batch and keeps training, evaluating and
//! moving the next batch from the pool to the labeled set until the pool is
//! empty. Nothing is stopped early: stopping methods are applied afterwards
//! to the finished [`LearningCurve`], so one curve serves every stopping
//! configuration.
//!
//! # Curve file format
//!
//! Curves serialize as JSON lines. The first line is the header, each
//! following line one iteration:
//!
//! ```text
//! {"record":"header","format":"alstop-curve","version":1,"label":"...","corpus_fingerprint":"...","pool_size":1600,"batch_size":16,"num_classes":2,"stop_set_size":1600,"config":{...}}
//! {"record":"iteration","t":0,"annotations":16,"f_measure":0.61,"kappa":null}
//! {"record":"iteration","t":1,"annotations":32,"f_measure":0.66,"kappa":{"kappa":0.4,"observed":0.71,"expected":0.52}}
//! ```
//!
//! Lines with any other `record` tag are ignored by [`read_curve`], which lets
//! the harness append its own records to the same file. Stop-set predictions
//! are kept in memory only.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::corpus::{fingerprint, Corpus, SparseDoc};
use crate::linear_model::{fit_with_features, predict_all, FitError, TrainConfig};
use crate::metrics::{cohens_kappa, f_measure, KappaValue, MetricError};
use crate::sampling::{select_closest, select_random, SamplingError};

pub const CURVE_FORMAT: &str = "alstop-curve";
pub const CURVE_VERSION: u32 = 1;
pub const DEFAULT_STOP_SET_CAP: usize = 2000;

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("the unlabeled pool is empty")]
    EmptyPool,
    #[error("the test set is empty")]
    EmptyTestSet,
    #[error("invalid active learning config: {0}")]
    InvalidConfig(String),
    #[error("train and test corpora disagree: {0}")]
    CorpusMismatch(String),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Debug, thiserror::Error)]
pub enum CurveIoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

/// How the initial labeled set is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedSize {
    /// One randomly selected batch.
    OneBatch,
    Fixed(usize),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    /// Closest-to-hyperplane uncertainty sampling.
    #[default]
    Closest,
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ALConfig {
    /// Batch size as a percentage of the initial pool, in (0, 100].
    pub batch_percent: f64,
    pub seed_size: SeedSize,
    /// `None` means `min(2000, pool size)`.
    pub stop_set_size: Option<usize>,
    pub sampler: Sampler,
    pub seed: u64,
    pub train: TrainConfig,
}

impl Default for ALConfig {
    fn default() -> Self {
        ALConfig {
            batch_percent: 1.0,
            seed_size: SeedSize::OneBatch,
            stop_set_size: None,
            sampler: Sampler::Closest,
            seed: 0,
            train: TrainConfig::default(),
        }
    }
}

impl ALConfig {
    /// `ceil(p / 100 × pool_size)`, at least 1.
    pub fn batch_size(&self, pool_size: usize) -> usize {
        let exact = self.batch_percent * pool_size as f64 / 100.0;
        // absorb representation error such as 0.1 × 1000 / 100 = 1.0000000000000002
        let size = (exact - 1e-9 * exact.max(1.0)).ceil() as usize;
        size.max(1)
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if !(self.batch_percent > 0.0 && self.batch_percent <= 100.0) {
            return Err(EngineError::InvalidConfig(format!(
                "batch percent {} outside (0, 100]",
                self.batch_percent
            )));
        }
        if self.seed_size == SeedSize::Fixed(0) {
            return Err(EngineError::InvalidConfig(
                "seed size must be at least 1".into(),
            ));
        }
        if self.stop_set_size == Some(0) {
            return Err(EngineError::InvalidConfig(
                "stop set size must be at least 1".into(),
            ));
        }
        self.train.validate()?;
        Ok(())
    }
}

/// Derives an independent seed for one purpose of a run.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const SEED_BATCH_STREAM: u64 = 1;
const STOP_SET_STREAM: u64 = 2;
const RANDOM_SAMPLER_STREAM: u64 = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub t: usize,
    /// Labeled-set size the model at `t` was trained on.
    pub annotations: usize,
    pub f_measure: f64,
    /// Predictions on the stop set; empty for curves read back from disk.
    pub stop_predictions: Vec<usize>,
    /// Agreement with the previous model on the stop set; `None` at `t = 0`.
    pub kappa: Option<KappaValue>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearningCurve {
    pub records: Vec<IterationRecord>,
    pub config: ALConfig,
    pub corpus_fingerprint: String,
    pub pool_size: usize,
    pub batch_size: usize,
    pub num_classes: usize,
    pub stop_set_size: usize,
    /// Free-form task description, e.g. which one-vs-rest category.
    pub label: String,
}

impl LearningCurve {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn kappas(&self) -> impl Iterator<Item = Option<f64>> + '_ {
        self.records.iter().map(|r| r.kappa.map(|k| k.kappa))
    }

    pub fn f_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.f_measure)
    }
}

/// A uniform random subset of `size` pool doc ids (clamped to the pool),
/// returned in ascending id order.
pub fn stop_set_select(pool: &[SparseDoc], size: usize, seed: u64) -> Vec<usize> {
    let size = size.min(pool.len());
    if size == 0 {
        return Vec::new();
    }
    let mut ids = select_random(pool, size, seed).expect("size within pool");
    ids.sort_unstable();
    ids
}

/// Runs active learning over the whole train split and records one
/// [`IterationRecord`] per model.
pub fn run(train: &Corpus, test: &Corpus, cfg: &ALConfig) -> Result<LearningCurve, EngineError> {
    run_labeled(train, test, cfg, "")
}

pub fn run_labeled(
    train: &Corpus,
    test: &Corpus,
    cfg: &ALConfig,
    label: &str,
) -> Result<LearningCurve, EngineError> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(EngineError::EmptyPool);
    }
    if test.is_empty() {
        return Err(EngineError::EmptyTestSet);
    }
    if train.num_classes() != test.num_classes() {
        return Err(EngineError::CorpusMismatch(format!(
            "{} vs {} classes",
            train.num_classes(),
            test.num_classes()
        )));
    }
    let num_classes = train.num_classes();
    let num_features = train.num_features();
    let pool_size = train.len();
    let batch_size = cfg.batch_size(pool_size);
    let seed_size = match cfg.seed_size {
        SeedSize::OneBatch => batch_size,
        SeedSize::Fixed(n) => n,
    }
    .min(pool_size);

    let stop_ids: HashSet<usize> = stop_set_select(
        &train.docs,
        cfg.stop_set_size.unwrap_or(DEFAULT_STOP_SET_CAP),
        derive_seed(cfg.seed, STOP_SET_STREAM),
    )
    .into_iter()
    .collect();
    let stop_docs: Vec<SparseDoc> = train
        .docs
        .iter()
        .filter(|d| stop_ids.contains(&d.doc_id))
        .cloned()
        .collect();
    let test_golds = test.labels();

    let mut unlabeled: Vec<SparseDoc> = train.docs.clone();
    let mut labeled: Vec<SparseDoc> = Vec::with_capacity(pool_size);
    let seed_batch = select_random(
        &unlabeled,
        seed_size,
        derive_seed(cfg.seed, SEED_BATCH_STREAM),
    )?;
    move_batch(&mut unlabeled, &mut labeled, &seed_batch);

    let mut records: Vec<IterationRecord> = Vec::new();
    for t in 0.. {
        let mut model = fit_with_features(&labeled, num_classes, num_features, &cfg.train)?;
        model.iteration = t;
        let degenerate = model.degenerate_classes();
        if !degenerate.is_empty() {
            log::debug!("iteration {t}: degenerate one-vs-rest classes {degenerate:?}");
        }
        let f = f_measure(&predict_all(&model, &test.docs), &test_golds, num_classes)?;
        let stop_predictions = predict_all(&model, &stop_docs);
        let kappa = match records.last() {
            Some(prev) => Some(cohens_kappa(
                &prev.stop_predictions,
                &stop_predictions,
                num_classes,
            )?),
            None => None,
        };
        records.push(IterationRecord {
            t,
            annotations: labeled.len(),
            f_measure: f,
            stop_predictions,
            kappa,
        });
        if unlabeled.is_empty() {
            break;
        }
        let k = batch_size.min(unlabeled.len());
        let batch = match cfg.sampler {
            Sampler::Closest => select_closest(&model, &unlabeled, k)?,
            Sampler::Random => select_random(
                &unlabeled,
                k,
                derive_seed(cfg.seed, RANDOM_SAMPLER_STREAM.wrapping_add(t as u64 + 1)),
            )?,
        };
        move_batch(&mut unlabeled, &mut labeled, &batch);
    }

    Ok(LearningCurve {
        records,
        config: cfg.clone(),
        corpus_fingerprint: fingerprint(train, test),
        pool_size,
        batch_size,
        num_classes,
        stop_set_size: stop_docs.len(),
        label: label.to_owned(),
    })
}

fn move_batch(unlabeled: &mut Vec<SparseDoc>, labeled: &mut Vec<SparseDoc>, ids: &[usize]) {
    let chosen: HashSet<usize> = ids.iter().copied().collect();
    let (taken, kept): (Vec<_>, Vec<_>) = std::mem::take(unlabeled)
        .into_iter()
        .partition(|d| chosen.contains(&d.doc_id));
    *unlabeled = kept;
    labeled.extend(taken);
}

#[derive(Serialize, Deserialize)]
struct HeaderLine {
    format: String,
    version: u32,
    label: String,
    corpus_fingerprint: String,
    pool_size: usize,
    batch_size: usize,
    num_classes: usize,
    stop_set_size: usize,
    config: ALConfig,
}

#[derive(Serialize, Deserialize)]
struct IterationLine {
    t: usize,
    annotations: usize,
    f_measure: f64,
    kappa: Option<KappaValue>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum CurveLine {
    Header(HeaderLine),
    Iteration(IterationLine),
}

#[derive(Deserialize)]
struct Tag {
    record: String,
}

pub fn write_curve<W: Write>(mut out: W, curve: &LearningCurve) -> std::io::Result<()> {
    let header = CurveLine::Header(HeaderLine {
        format: CURVE_FORMAT.into(),
        version: CURVE_VERSION,
        label: curve.label.clone(),
        corpus_fingerprint: curve.corpus_fingerprint.clone(),
        pool_size: curve.pool_size,
        batch_size: curve.batch_size,
        num_classes: curve.num_classes,
        stop_set_size: curve.stop_set_size,
        config: curve.config.clone(),
    });
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for r in &curve.records {
        let line = CurveLine::Iteration(IterationLine {
            t: r.t,
            annotations: r.annotations,
            f_measure: r.f_measure,
            kappa: r.kappa,
        });
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn curve_to_string(curve: &LearningCurve) -> String {
    let mut buf = Vec::new();
    write_curve(&mut buf, curve).expect("writing to memory");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Reads a curve written by [`write_curve`]. Lines tagged with other record
/// kinds are skipped.
pub fn read_curve<R: BufRead>(input: R) -> Result<LearningCurve, CurveIoError> {
    let mut curve: Option<LearningCurve> = None;
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let json = |source| CurveIoError::Json {
            line: lineno,
            source,
        };
        let tag: Tag = serde_json::from_str(&line).map_err(json)?;
        if tag.record != "header" && tag.record != "iteration" {
            continue;
        }
        let format_err = |message: &str| CurveIoError::Format {
            line: lineno,
            message: message.into(),
        };
        match (serde_json::from_str(&line).map_err(json)?, curve.as_mut()) {
            (CurveLine::Header(h), None) => {
                if h.format != CURVE_FORMAT || h.version != CURVE_VERSION {
                    return Err(format_err("unsupported curve format or version"));
                }
                curve = Some(LearningCurve {
                    records: Vec::new(),
                    config: h.config,
                    corpus_fingerprint: h.corpus_fingerprint,
                    pool_size: h.pool_size,
                    batch_size: h.batch_size,
                    num_classes: h.num_classes,
                    stop_set_size: h.stop_set_size,
                    label: h.label,
                });
            }
            (CurveLine::Header(_), Some(_)) => return Err(format_err("duplicate header")),
            (CurveLine::Iteration(_), None) => return Err(format_err("iteration before header")),
            (CurveLine::Iteration(it), Some(c)) => {
                if it.t != c.records.len() {
                    return Err(format_err("iterations out of order"));
                }
                c.records.push(IterationRecord {
                    t: it.t,
                    annotations: it.annotations,
                    f_measure: it.f_measure,
                    stop_predictions: Vec::new(),
                    kappa: it.kappa,
                });
            }
        }
    }
    curve.ok_or(CurveIoError::Format {
        line: 0,
        message: "missing header".into(),
    })
}
