//! Pool-based active learning simulation for text classification, with
//! post-hoc evaluation of stopping methods across batch and window sizes.
//!
//! The pipeline is:
//!
//! 1. [`corpus`] turns labeled text (or a synthetic generator) into sparse
//!    binary bag-of-words documents.
//! 2. [`engine`] runs closest-to-hyperplane active learning with the
//!    [`linear_model`] SVM until the pool is exhausted, recording test
//!    F-measure and stop-set kappa agreement per iteration.
//! 3. [`stopping`] scans finished curves for the windowed kappa rule and the
//!    Oracle-P reference point.
//! 4. [`harness`] runs grids of curves and writes the aggregate CSV.

pub mod corpus;
pub mod engine;
pub mod harness;
pub mod linear_model;
pub mod metrics;
pub mod sampling;
pub mod stopping;

pub use corpus::{Corpus, SparseDoc, Vocabulary};
pub use engine::{ALConfig, LearningCurve};
pub use linear_model::{ModelSnapshot, TrainConfig};
pub use stopping::{Bv2009Params, OracleParams, StopDecision};
