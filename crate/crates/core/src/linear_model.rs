//! L2-regularized L1-hinge linear SVM trained by dual coordinate descent,
//! one-vs-rest for multiclass problems.
//!
//! The bias is learned as the weight of an implicit constant feature with
//! value 1, so it is regularized together with the other weights. For a
//! binary subproblem with labels `y_i ∈ {-1, +1}` the solver maximizes the
//! dual
//!
//! ```text
//! D(α) = Σ α_i - ½ ‖Σ α_i y_i x̂_i‖²,   0 ≤ α_i ≤ C
//! ```
//!
//! one coordinate at a time while keeping `ŵ = Σ α_i y_i x̂_i` up to date.

use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::SparseDoc;

#[derive(Debug, thiserror::Error)]
pub enum FitError {
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("label {label} out of range for {num_classes} classes")]
    LabelOutOfRange { label: usize, num_classes: usize },
    #[error("need at least 2 classes, got {0}")]
    TooFewClasses(usize),
    #[error("one-vs-rest subproblem for class {class} has no positive or no negative examples")]
    DegenerateClass { class: usize },
    #[error("feature {feature} out of range for {num_features} features")]
    FeatureOutOfRange { feature: u32, num_features: usize },
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, thiserror::Error)]
pub enum ModelIoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("not a model dump")]
    BadMagic,
    #[error("unsupported model dump version {0}")]
    UnsupportedVersion(u32),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Regularization trade-off.
    pub c: f64,
    /// Stop when the largest projected-gradient magnitude in an epoch is at
    /// most this.
    pub tol: f64,
    pub max_epochs: usize,
    pub shuffle_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            c: 1.0,
            tol: 1e-3,
            max_epochs: 1000,
            shuffle_seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), FitError> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(FitError::InvalidConfig(format!(
                "C must be positive, got {}",
                self.c
            )));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(FitError::InvalidConfig(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_epochs == 0 {
            return Err(FitError::InvalidConfig(
                "max_epochs must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Weight vector and bias of one binary separator.
#[derive(Clone, Debug, PartialEq)]
pub struct Hyperplane {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl Hyperplane {
    pub fn zeros(num_features: usize) -> Self {
        Hyperplane {
            weights: vec![0.0; num_features],
            bias: 0.0,
        }
    }

    #[inline]
    pub fn decision(&self, features: &[u32]) -> f64 {
        features
            .iter()
            .map(|&f| self.weights[f as usize])
            .sum::<f64>()
            + self.bias
    }

    pub fn norm_sq(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>() + self.bias * self.bias
    }
}

/// A trained one-vs-rest model. Binary problems store one hyperplane for
/// class 1; multiclass problems store one per class. A `None` plane marks a
/// degenerate subproblem whose decision value is `-∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSnapshot {
    planes: Vec<Option<Hyperplane>>,
    num_classes: usize,
    num_features: usize,
    pub iteration: usize,
    pub train_size: usize,
}

impl ModelSnapshot {
    pub fn new(planes: Vec<Option<Hyperplane>>, num_classes: usize, num_features: usize) -> Self {
        assert!(num_classes >= 2);
        assert_eq!(planes.len(), plane_count(num_classes));
        assert!(planes
            .iter()
            .flatten()
            .all(|p| p.weights.len() == num_features));
        ModelSnapshot {
            planes,
            num_classes,
            num_features,
            iteration: 0,
            train_size: 0,
        }
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn is_binary(&self) -> bool {
        self.num_classes == 2
    }

    pub fn planes(&self) -> &[Option<Hyperplane>] {
        &self.planes
    }

    /// Classes whose subproblem could not be trained.
    pub fn degenerate_classes(&self) -> Vec<usize> {
        let offset = usize::from(self.is_binary());
        self.planes
            .iter()
            .enumerate()
            .filter(|(_, p)| p.is_none())
            .map(|(i, _)| i + offset)
            .collect()
    }
}

fn plane_count(num_classes: usize) -> usize {
    if num_classes == 2 {
        1
    } else {
        num_classes
    }
}

/// `w_c · x + b_c` per stored hyperplane: one value for binary models,
/// `num_classes` values otherwise. Degenerate planes give `-∞`.
pub fn decision_values(model: &ModelSnapshot, doc: &SparseDoc) -> Vec<f64> {
    model
        .planes
        .iter()
        .map(|p| {
            p.as_ref()
                .map_or(f64::NEG_INFINITY, |p| p.decision(&doc.features))
        })
        .collect()
}

/// Binary: class 1 iff the decision value is positive. Multiclass: argmax,
/// ties to the lowest class id.
pub fn predict(model: &ModelSnapshot, doc: &SparseDoc) -> usize {
    predict_from_values(&decision_values(model, doc))
}

pub(crate) fn predict_from_values(values: &[f64]) -> usize {
    if let [v] = values {
        return usize::from(*v > 0.0);
    }
    let mut best = 0;
    for (c, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = c;
        }
    }
    best
}

pub fn predict_all(model: &ModelSnapshot, docs: &[SparseDoc]) -> Vec<usize> {
    docs.iter().map(|d| predict(model, d)).collect()
}

/// Trains one-vs-rest, failing if any subproblem is degenerate.
pub fn fit(
    train: &[SparseDoc],
    num_classes: usize,
    cfg: &TrainConfig,
) -> Result<ModelSnapshot, FitError> {
    let model = fit_partial(train, num_classes, cfg)?;
    match model.degenerate_classes().first() {
        Some(&class) => Err(FitError::DegenerateClass { class }),
        None => Ok(model),
    }
}

/// Like [`fit`] but leaves degenerate subproblems as `None` planes instead of
/// failing.
pub fn fit_partial(
    train: &[SparseDoc],
    num_classes: usize,
    cfg: &TrainConfig,
) -> Result<ModelSnapshot, FitError> {
    let num_features = train
        .iter()
        .filter_map(|d| d.features.last())
        .map(|&f| f as usize + 1)
        .max()
        .unwrap_or(0);
    fit_with_features(train, num_classes, num_features, cfg)
}

/// [`fit_partial`] with an explicit feature-space size, so that models fit
/// on small labeled subsets still cover the whole vocabulary.
pub fn fit_with_features(
    train: &[SparseDoc],
    num_classes: usize,
    num_features: usize,
    cfg: &TrainConfig,
) -> Result<ModelSnapshot, FitError> {
    cfg.validate()?;
    if num_classes < 2 {
        return Err(FitError::TooFewClasses(num_classes));
    }
    if train.is_empty() {
        return Err(FitError::EmptyTrainingSet);
    }
    if let Some(d) = train.iter().find(|d| d.label >= num_classes) {
        return Err(FitError::LabelOutOfRange {
            label: d.label,
            num_classes,
        });
    }
    if let Some(&f) = train
        .iter()
        .filter_map(|d| d.features.last())
        .find(|&&f| f as usize >= num_features)
    {
        return Err(FitError::FeatureOutOfRange {
            feature: f,
            num_features,
        });
    }
    let xs: Vec<&[u32]> = train.iter().map(|d| d.features.as_slice()).collect();
    let positive_classes: Vec<usize> = if num_classes == 2 {
        vec![1]
    } else {
        (0..num_classes).collect()
    };
    let planes = positive_classes
        .par_iter()
        .map(|&class| {
            let ys: Vec<f64> = train
                .iter()
                .map(|d| if d.label == class { 1.0 } else { -1.0 })
                .collect();
            let has_pos = ys.iter().any(|&y| y > 0.0);
            let has_neg = ys.iter().any(|&y| y < 0.0);
            (has_pos && has_neg).then(|| solve_binary(&xs, &ys, num_features, cfg).plane)
        })
        .collect();
    let mut model = ModelSnapshot::new(planes, num_classes, num_features);
    model.train_size = train.len();
    Ok(model)
}

/// Objective values observed at the end of one solver epoch.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub primal: f64,
    pub dual: f64,
    pub max_violation: f64,
    pub min_alpha: f64,
    pub max_alpha: f64,
}

#[derive(Clone, Debug)]
pub struct BinarySolution {
    pub plane: Hyperplane,
    pub alpha: Vec<f64>,
    pub epochs: usize,
    pub converged: bool,
    /// Largest projected-gradient magnitude seen in the final epoch.
    pub max_violation: f64,
    /// Per-epoch statistics; empty unless requested.
    pub trace: Vec<EpochStats>,
}

/// Dual coordinate descent on one binary problem with labels in {-1, +1}.
pub fn solve_binary(
    xs: &[&[u32]],
    ys: &[f64],
    num_features: usize,
    cfg: &TrainConfig,
) -> BinarySolution {
    solve(xs, ys, num_features, cfg, false)
}

/// [`solve_binary`] that also records [`EpochStats`] after every epoch.
pub fn solve_binary_traced(
    xs: &[&[u32]],
    ys: &[f64],
    num_features: usize,
    cfg: &TrainConfig,
) -> BinarySolution {
    solve(xs, ys, num_features, cfg, true)
}

fn solve(
    xs: &[&[u32]],
    ys: &[f64],
    num_features: usize,
    cfg: &TrainConfig,
    traced: bool,
) -> BinarySolution {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    let upper = cfg.c;
    let mut plane = Hyperplane::zeros(num_features);
    let mut alpha = vec![0.0; n];
    // diagonal of the Gram matrix: |x_i| binary features plus the bias feature
    let diag: Vec<f64> = xs.iter().map(|x| x.len() as f64 + 1.0).collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.shuffle_seed);
    let mut trace = Vec::new();
    let mut epochs = 0;
    let mut converged = false;
    let mut max_violation = f64::INFINITY;

    while epochs < cfg.max_epochs {
        order.shuffle(&mut rng);
        max_violation = 0.0f64;
        for &i in &order {
            let y = ys[i];
            let grad = y * plane.decision(xs[i]) - 1.0;
            let projected = if alpha[i] <= 0.0 {
                grad.min(0.0)
            } else if alpha[i] >= upper {
                grad.max(0.0)
            } else {
                grad
            };
            max_violation = max_violation.max(projected.abs());
            if projected.abs() > 1e-12 {
                let old = alpha[i];
                alpha[i] = (old - grad / diag[i]).clamp(0.0, upper);
                let step = (alpha[i] - old) * y;
                if step != 0.0 {
                    for &f in xs[i] {
                        plane.weights[f as usize] += step;
                    }
                    plane.bias += step;
                }
            }
        }
        epochs += 1;
        if traced {
            trace.push(EpochStats {
                epoch: epochs,
                primal: primal_objective(&plane, xs, ys, upper),
                dual: dual_objective(&plane, &alpha),
                max_violation,
                min_alpha: alpha.iter().copied().fold(f64::INFINITY, f64::min),
                max_alpha: alpha.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            });
        }
        if max_violation <= cfg.tol {
            converged = true;
            break;
        }
    }
    BinarySolution {
        plane,
        alpha,
        epochs,
        converged,
        max_violation,
        trace,
    }
}

/// `½‖ŵ‖² + C Σ max(0, 1 - y_i ŵ·x̂_i)`.
pub fn primal_objective(plane: &Hyperplane, xs: &[&[u32]], ys: &[f64], c: f64) -> f64 {
    let hinge: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, &y)| (1.0 - y * plane.decision(x)).max(0.0))
        .sum();
    0.5 * plane.norm_sq() + c * hinge
}

/// `Σ α_i - ½‖ŵ‖²`, with `ŵ` assumed consistent with `alpha`.
pub fn dual_objective(plane: &Hyperplane, alpha: &[f64]) -> f64 {
    alpha.iter().sum::<f64>() - 0.5 * plane.norm_sq()
}

/// Recomputes `ŵ = Σ α_i y_i x̂_i` from scratch.
pub fn weights_from_duals(
    xs: &[&[u32]],
    ys: &[f64],
    alpha: &[f64],
    num_features: usize,
) -> Hyperplane {
    let mut plane = Hyperplane::zeros(num_features);
    for ((x, &y), &a) in xs.iter().zip(ys).zip(alpha) {
        for &f in *x {
            plane.weights[f as usize] += a * y;
        }
        plane.bias += a * y;
    }
    plane
}

const MODEL_MAGIC: &[u8; 4] = b"ALSM";
pub const MODEL_DUMP_VERSION: u32 = 1;

/// Writes a little-endian binary dump: magic, version, V, C, plane count,
/// then per plane a presence byte followed by bias and V weights as raw
/// IEEE-754 bits.
pub fn write_model<W: Write>(mut out: W, model: &ModelSnapshot) -> std::io::Result<()> {
    out.write_all(MODEL_MAGIC)?;
    out.write_all(&MODEL_DUMP_VERSION.to_le_bytes())?;
    for v in [
        model.num_features,
        model.num_classes,
        model.planes.len(),
        model.iteration,
        model.train_size,
    ] {
        out.write_all(&(v as u64).to_le_bytes())?;
    }
    for plane in &model.planes {
        match plane {
            None => out.write_all(&[0])?,
            Some(p) => {
                out.write_all(&[1])?;
                out.write_all(&p.bias.to_le_bytes())?;
                for w in &p.weights {
                    out.write_all(&w.to_le_bytes())?;
                }
            }
        }
    }
    out.flush()
}

pub fn read_model<R: Read>(mut input: R) -> Result<ModelSnapshot, ModelIoError> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MODEL_MAGIC {
        return Err(ModelIoError::BadMagic);
    }
    let mut word = [0u8; 4];
    input.read_exact(&mut word)?;
    let version = u32::from_le_bytes(word);
    if version != MODEL_DUMP_VERSION {
        return Err(ModelIoError::UnsupportedVersion(version));
    }
    let read_u64 = |input: &mut R| -> std::io::Result<u64> {
        let mut b = [0u8; 8];
        input.read_exact(&mut b)?;
        Ok(u64::from_le_bytes(b))
    };
    let num_features = read_u64(&mut input)? as usize;
    let num_classes = read_u64(&mut input)? as usize;
    let n_planes = read_u64(&mut input)? as usize;
    let iteration = read_u64(&mut input)? as usize;
    let train_size = read_u64(&mut input)? as usize;
    if num_classes < 2 || n_planes != plane_count(num_classes) {
        return Err(ModelIoError::BadMagic);
    }
    let mut planes = Vec::with_capacity(n_planes);
    for _ in 0..n_planes {
        let mut flag = [0u8; 1];
        input.read_exact(&mut flag)?;
        if flag[0] == 0 {
            planes.push(None);
            continue;
        }
        let bias = f64::from_bits(read_u64(&mut input)?);
        let weights = (0..num_features)
            .map(|_| read_u64(&mut input).map(f64::from_bits))
            .collect::<std::io::Result<Vec<_>>>()?;
        planes.push(Some(Hyperplane { weights, bias }));
    }
    let mut model = ModelSnapshot::new(planes, num_classes, num_features);
    model.iteration = iteration;
    model.train_size = train_size;
    Ok(model)
}
