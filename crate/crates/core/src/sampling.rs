//! Batch selection from the unlabeled pool.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::SparseDoc;
use crate::linear_model::{decision_values, ModelSnapshot};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SamplingError {
    #[error("batch of {requested} requested from a pool of {available}")]
    BatchTooLarge { requested: usize, available: usize },
    #[error("batch size must be at least 1")]
    EmptyBatch,
}

fn check_size(k: usize, pool: usize) -> Result<(), SamplingError> {
    if k == 0 {
        return Err(SamplingError::EmptyBatch);
    }
    if k > pool {
        return Err(SamplingError::BatchTooLarge {
            requested: k,
            available: pool,
        });
    }
    Ok(())
}

/// Distance-to-hyperplane proxy; smaller means more uncertain.
///
/// Binary models use `|f(x)|`. One-vs-rest models use `|max_c f_c(x)|`, the
/// magnitude of the top-scoring class's decision value.
pub fn uncertainty_score(model: &ModelSnapshot, doc: &SparseDoc) -> f64 {
    score_from_values(&decision_values(model, doc))
}

pub fn score_from_values(values: &[f64]) -> f64 {
    values
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
        .abs()
}

/// The `k` pool docs closest to the decision boundary, ordered by
/// `(score, doc_id)`.
pub fn select_closest(
    model: &ModelSnapshot,
    pool: &[SparseDoc],
    k: usize,
) -> Result<Vec<usize>, SamplingError> {
    check_size(k, pool.len())?;
    let mut scored: Vec<(f64, usize)> = pool
        .par_iter()
        .map(|d| (uncertainty_score(model, d), d.doc_id))
        .collect();
    let by_score = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < scored.len() {
        scored.select_nth_unstable_by(k - 1, by_score);
        scored.truncate(k);
    }
    scored.sort_unstable_by(by_score);
    Ok(scored.into_iter().map(|(_, id)| id).collect())
}

/// Uniform sample of `k` doc ids without replacement, in draw order.
pub fn select_random(pool: &[SparseDoc], k: usize, seed: u64) -> Result<Vec<usize>, SamplingError> {
    check_size(k, pool.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(index::sample(&mut rng, pool.len(), k)
        .into_iter()
        .map(|i| pool[i].doc_id)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear_model::Hyperplane;
    use std::collections::HashSet;

    /// A binary model whose decision value for doc `i` (single feature `i`)
    /// is `values[i]`.
    fn model_with_values(values: &[f64]) -> ModelSnapshot {
        let plane = Hyperplane {
            weights: values.to_vec(),
            bias: 0.0,
        };
        ModelSnapshot::new(vec![Some(plane)], 2, values.len())
    }

    fn pool(n: usize) -> Vec<SparseDoc> {
        (0..n)
            .map(|i| SparseDoc::new(i, vec![i as u32], 0))
            .collect()
    }

    #[test]
    fn score_examples() {
        assert_eq!(score_from_values(&[-0.1]), 0.1);
        assert_eq!(score_from_values(&[0.0]), 0.0);
        assert_eq!(score_from_values(&[-1.2, 0.3, -0.4]), 0.3);
        assert_eq!(score_from_values(&[f64::NEG_INFINITY; 2]), f64::INFINITY);
    }

    #[test]
    fn closest_examples() {
        // d1..d4 as doc ids 1..4; doc 0 is far away
        let model = model_with_values(&[5.0, 0.9, -0.1, 0.3, -0.5]);
        let p = pool(5);
        assert_eq!(select_closest(&model, &p[1..], 2).unwrap(), vec![2, 3]);
        assert_eq!(select_closest(&model, &p, 5).unwrap(), vec![2, 3, 4, 1, 0]);
        let flat = model_with_values(&[0.5; 5]);
        assert_eq!(select_closest(&flat, &p, 2).unwrap(), vec![0, 1]);
        assert_eq!(
            select_closest(&flat, &p, 6),
            Err(SamplingError::BatchTooLarge {
                requested: 6,
                available: 5
            })
        );
    }

    #[test]
    fn random_examples() {
        let p = pool(1000);
        let a = select_random(&p, 10, 1).unwrap();
        assert_eq!(a, select_random(&p, 10, 1).unwrap());
        assert_ne!(a, select_random(&p, 10, 2).unwrap());
        let all: HashSet<usize> = select_random(&p[..20], 20, 3)
            .unwrap()
            .into_iter()
            .collect();
        assert_eq!(all, (0..20).collect());
        assert_eq!(select_random(&p, 0, 3), Err(SamplingError::EmptyBatch));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn batch_dominates_rest(values in prop::collection::vec(-2.0f64..2.0, 1..60), k_frac in 0.0f64..1.0) {
                let model = model_with_values(&values);
                let p = pool(values.len());
                let k = 1 + ((values.len() - 1) as f64 * k_frac) as usize;
                let picked = select_closest(&model, &p, k).unwrap();
                let set: HashSet<usize> = picked.iter().copied().collect();
                prop_assert_eq!(set.len(), k);
                let worst_in = picked.iter().map(|&i| values[i].abs()).fold(0.0, f64::max);
                let best_out = (0..values.len())
                    .filter(|i| !set.contains(i))
                    .map(|i| values[i].abs())
                    .fold(f64::INFINITY, f64::min);
                prop_assert!(worst_in <= best_out);
            }

            #[test]
            fn random_is_distinct_subset(n in 1usize..200, k_frac in 0.0f64..1.0, seed in any::<u64>()) {
                let p = pool(n);
                let k = 1 + ((n - 1) as f64 * k_frac) as usize;
                let picked = select_random(&p, k, seed).unwrap();
                let set: HashSet<usize> = picked.iter().copied().collect();
                prop_assert_eq!(set.len(), k);
                prop_assert!(set.iter().all(|&i| i < n));
            }
        }
    }
}
