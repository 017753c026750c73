//! F-measure and Cohen's kappa over class-id vectors.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("label {label} out of range for {num_classes} classes")]
    LabelOutOfRange { label: usize, num_classes: usize },
}

fn check_pair(a: &[usize], b: &[usize], num_classes: usize) -> Result<(), MetricError> {
    if a.len() != b.len() {
        return Err(MetricError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    if let Some(&label) = a.iter().chain(b).find(|&&l| l >= num_classes) {
        return Err(MetricError::LabelOutOfRange { label, num_classes });
    }
    Ok(())
}

/// Per-class true positive, false positive and false negative counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: Vec<usize>,
    pub fp: Vec<usize>,
    pub fn_: Vec<usize>,
    pub total: usize,
}

impl ConfusionCounts {
    pub fn compute(
        preds: &[usize],
        golds: &[usize],
        num_classes: usize,
    ) -> Result<Self, MetricError> {
        check_pair(preds, golds, num_classes)?;
        let mut counts = ConfusionCounts {
            tp: vec![0; num_classes],
            fp: vec![0; num_classes],
            fn_: vec![0; num_classes],
            total: preds.len(),
        };
        for (&p, &g) in preds.iter().zip(golds) {
            if p == g {
                counts.tp[p] += 1;
            } else {
                counts.fp[p] += 1;
                counts.fn_[g] += 1;
            }
        }
        Ok(counts)
    }

    pub fn precision(&self, class: usize) -> f64 {
        ratio(self.tp[class], self.tp[class] + self.fp[class])
    }

    pub fn recall(&self, class: usize) -> f64 {
        ratio(self.tp[class], self.tp[class] + self.fn_[class])
    }

    pub fn f1(&self, class: usize) -> f64 {
        let p = self.precision(class);
        let r = self.recall(class);
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    /// Whether the class occurs among golds or predictions.
    fn is_present(&self, class: usize) -> bool {
        self.tp[class] + self.fp[class] + self.fn_[class] > 0
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Binary (`num_classes == 2`): F1 of class 1. Otherwise the macro average
/// of per-class F1 over classes that appear in golds or predictions.
pub fn f_measure(preds: &[usize], golds: &[usize], num_classes: usize) -> Result<f64, MetricError> {
    let counts = ConfusionCounts::compute(preds, golds, num_classes)?;
    if num_classes == 2 {
        return Ok(counts.f1(1));
    }
    let (sum, n) = (0..num_classes)
        .filter(|&c| counts.is_present(c))
        .fold((0.0, 0usize), |(s, n), c| (s + counts.f1(c), n + 1));
    Ok(if n == 0 { 0.0 } else { sum / n as f64 })
}

/// Cohen's kappa with observed and chance agreement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaValue {
    pub kappa: f64,
    pub observed: f64,
    pub expected: f64,
}

/// Cohen's kappa over full `num_classes`-way marginals. When chance
/// agreement is 1 (both vectors constant and identical) kappa is 1.
pub fn cohens_kappa(
    a: &[usize],
    b: &[usize],
    num_classes: usize,
) -> Result<KappaValue, MetricError> {
    check_pair(a, b, num_classes)?;
    let n = a.len() as f64;
    let mut count_a = vec![0usize; num_classes];
    let mut count_b = vec![0usize; num_classes];
    let mut agree = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        count_a[x] += 1;
        count_b[y] += 1;
        agree += usize::from(x == y);
    }
    let observed = agree as f64 / n;
    let expected = count_a
        .iter()
        .zip(&count_b)
        .map(|(&ca, &cb)| (ca as f64 / n) * (cb as f64 / n))
        .sum::<f64>();
    let kappa = if expected >= 1.0 {
        1.0
    } else {
        ((observed - expected) / (1.0 - expected)).clamp(-1.0, 1.0)
    };
    Ok(KappaValue {
        kappa,
        observed,
        expected,
    })
}
