//! Post-hoc stopping methods over a finished [`LearningCurve`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::engine::LearningCurve;

pub const DEFAULT_KAPPA_THRESHOLD: f64 = 0.99;
pub const DEFAULT_ORACLE_PERCENT: f64 = 99.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StoppingError {
    #[error("window size must be at least 1")]
    ZeroWindow,
    #[error("kappa threshold {0} outside (0, 1]")]
    Threshold(f64),
    #[error("oracle percent {0} outside (0, 100]")]
    Percent(f64),
}

/// Windowed-mean kappa agreement rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bv2009Params {
    pub window_size: usize,
    pub kappa_threshold: f64,
}

impl Bv2009Params {
    pub fn new(window_size: usize, kappa_threshold: f64) -> Result<Self, StoppingError> {
        if window_size == 0 {
            return Err(StoppingError::ZeroWindow);
        }
        if !(kappa_threshold > 0.0 && kappa_threshold <= 1.0) {
            return Err(StoppingError::Threshold(kappa_threshold));
        }
        Ok(Bv2009Params {
            window_size,
            kappa_threshold,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleParams {
    pub percent: f64,
}

impl OracleParams {
    pub fn new(percent: f64) -> Result<Self, StoppingError> {
        if !(percent > 0.0 && percent <= 100.0) {
            return Err(StoppingError::Percent(percent));
        }
        Ok(OracleParams { percent })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum StopMethod {
    Bv2009(Bv2009Params),
    Oracle(OracleParams),
}

impl StopMethod {
    /// Row label used in reports, e.g. `Oracle-99` or `BV2009`.
    pub fn label(&self) -> String {
        match self {
            StopMethod::Oracle(p) => format!("Oracle-{}", p.percent),
            StopMethod::Bv2009(_) => "BV2009".to_owned(),
        }
    }

    pub fn window_size(&self) -> Option<usize> {
        match self {
            StopMethod::Bv2009(p) => Some(p.window_size),
            StopMethod::Oracle(_) => None,
        }
    }

    pub fn apply(&self, curve: &LearningCurve) -> StopDecision {
        match self {
            StopMethod::Bv2009(p) => bv2009_stop(curve, p),
            StopMethod::Oracle(p) => oracle_stop(curve, p),
        }
    }
}

impl fmt::Display for StopMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StopMethod::Bv2009(p) => {
                write!(f, "BV2009(n={}, θ={})", p.window_size, p.kappa_threshold)
            }
            StopMethod::Oracle(p) => write!(f, "Oracle-{}", p.percent),
        }
    }
}

/// Where a stopping method halted, with the curve values at that point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StopDecision {
    pub method: StopMethod,
    /// `None` when the method never fired.
    pub stop_iteration: Option<usize>,
    pub exhausted: bool,
    pub annotations: usize,
    pub f_measure: f64,
}

impl StopDecision {
    fn at(method: StopMethod, curve: &LearningCurve, t: usize) -> Self {
        let r = &curve.records[t];
        StopDecision {
            method,
            stop_iteration: Some(t),
            exhausted: false,
            annotations: r.annotations,
            f_measure: r.f_measure,
        }
    }

    fn exhausted(method: StopMethod, curve: &LearningCurve) -> Self {
        StopDecision {
            method,
            stop_iteration: None,
            exhausted: true,
            annotations: curve.pool_size,
            f_measure: curve.records.last().map_or(0.0, |r| r.f_measure),
        }
    }
}

/// Stops at the first iteration `t ≥ n` where the mean of the `n` kappas
/// ending at `t` reaches the threshold. Kappa `t` compares models `t-1` and
/// `t`, so `n + 1` models exist before the first possible stop.
pub fn bv2009_stop(curve: &LearningCurve, params: &Bv2009Params) -> StopDecision {
    let method = StopMethod::Bv2009(*params);
    let n = params.window_size;
    let kappas: Vec<Option<f64>> = curve.kappas().collect();
    for t in n..kappas.len() {
        let window = &kappas[t + 1 - n..=t];
        let Some(sum) = window.iter().try_fold(0.0, |s, k| k.map(|k| s + k)) else {
            continue;
        };
        if sum / n as f64 >= params.kappa_threshold {
            return StopDecision::at(method, curve, t);
        }
    }
    StopDecision::exhausted(method, curve)
}

/// Stops at the first iteration whose F reaches `P%` of the curve maximum.
/// Needs the whole curve, so it is only a reference point.
pub fn oracle_stop(curve: &LearningCurve, params: &OracleParams) -> StopDecision {
    let method = StopMethod::Oracle(*params);
    let f_max = curve.f_values().fold(f64::NEG_INFINITY, f64::max);
    let target = params.percent / 100.0 * f_max;
    match curve.f_values().position(|f| f >= target) {
        Some(t) => StopDecision::at(method, curve, t),
        None => StopDecision::exhausted(method, curve),
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use crate::engine::{ALConfig, IterationRecord, LearningCurve};
    use crate::metrics::KappaValue;

    /// A curve with the given F values and kappas (`kappas[t-1]` belongs to
    /// iteration `t`), 10 annotations per iteration.
    pub fn curve(f: &[f64], kappas: &[f64]) -> LearningCurve {
        assert_eq!(kappas.len() + 1, f.len().max(1));
        let records = f
            .iter()
            .enumerate()
            .map(|(t, &f_measure)| IterationRecord {
                t,
                annotations: 10 * (t + 1),
                f_measure,
                stop_predictions: Vec::new(),
                kappa: (t > 0).then(|| KappaValue {
                    kappa: kappas[t - 1],
                    observed: 0.0,
                    expected: 0.0,
                }),
            })
            .collect();
        LearningCurve {
            records,
            config: ALConfig::default(),
            corpus_fingerprint: String::new(),
            pool_size: 10 * f.len(),
            batch_size: 10,
            num_classes: 2,
            stop_set_size: 0,
            label: String::new(),
        }
    }
}
