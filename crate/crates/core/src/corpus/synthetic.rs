use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{corpora_from_tokens, Corpus, CorpusError, Stopwords};

/// Parameters of the seeded topic-word corpus generator.
///
/// Class `c` owns a contiguous block of `vocab_size / classes` words. Each
/// token of a class-`c` document is drawn from that block with probability
/// `skew` and uniformly from the whole vocabulary otherwise, so `skew = 1`
/// gives disjoint class vocabularies and `skew = 0` gives indistinguishable
/// classes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticParams {
    pub classes: usize,
    pub vocab_size: usize,
    pub docs: usize,
    pub doc_len: usize,
    pub skew: f64,
    pub seed: u64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        SyntheticParams {
            classes: 2,
            vocab_size: 500,
            docs: 2000,
            doc_len: 20,
            skew: 0.3,
            seed: 0,
        }
    }
}

impl SyntheticParams {
    fn validate(&self) -> Result<(), CorpusError> {
        let bad = |msg: String| Err(CorpusError::InvalidParams(msg));
        if self.classes < 2 {
            return bad(format!("need at least 2 classes, got {}", self.classes));
        }
        if self.vocab_size < self.classes {
            return bad(format!(
                "vocab size {} smaller than class count {}",
                self.vocab_size, self.classes
            ));
        }
        if self.docs < 2 * self.classes {
            return bad(format!(
                "need at least {} docs for {} classes, got {}",
                2 * self.classes,
                self.classes,
                self.docs
            ));
        }
        if self.doc_len == 0 {
            return bad("doc length must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.skew) {
            return bad(format!("skew {} outside [0, 1]", self.skew));
        }
        Ok(())
    }
}

/// Fixed-width lowercase name for word `i`, so lexicographic order matches
/// numeric order and names survive the tokenizer.
fn word_name(mut i: usize, width: usize) -> String {
    let mut bytes = vec![b'a'; width];
    for slot in bytes.iter_mut().rev() {
        *slot = b'a' + (i % 26) as u8;
        i /= 26;
    }
    String::from_utf8(bytes).unwrap()
}

fn name_width(vocab_size: usize) -> usize {
    let mut width = 1;
    let mut cap = 26usize;
    while cap < vocab_size {
        width += 1;
        cap = cap.saturating_mul(26);
    }
    width
}

/// Generates a stratified 80/20 train/test pair. Deterministic per seed.
pub fn generate_synthetic(params: &SyntheticParams) -> Result<(Corpus, Corpus), CorpusError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let width = name_width(params.vocab_size);
    let names: Vec<String> = (0..params.vocab_size)
        .map(|i| word_name(i, width))
        .collect();
    let block = |c: usize| {
        let lo = c * params.vocab_size / params.classes;
        let hi = (c + 1) * params.vocab_size / params.classes;
        lo..hi
    };

    let mut train = Vec::new();
    let mut test = Vec::new();
    for c in 0..params.classes {
        let n_class = params.docs / params.classes + usize::from(c < params.docs % params.classes);
        let n_train = (n_class * 4 / 5).clamp(1, n_class - 1);
        let own = block(c);
        for j in 0..n_class {
            let tokens: Vec<String> = (0..params.doc_len)
                .map(|_| {
                    let w = if rng.gen::<f64>() < params.skew {
                        rng.gen_range(own.clone())
                    } else {
                        rng.gen_range(0..params.vocab_size)
                    };
                    names[w].clone()
                })
                .collect();
            if j < n_train {
                train.push((tokens, c));
            } else {
                test.push((tokens, c));
            }
        }
    }
    let class_names = (0..params.classes).map(|c| format!("class{c}")).collect();
    corpora_from_tokens(class_names, &train, &test, &Stopwords::empty(), 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_names_sort_numerically() {
        let w = name_width(500);
        assert_eq!(w, 2);
        let names: Vec<String> = (0..500).map(|i| word_name(i, w)).collect();
        assert!(names.windows(2).all(|p| p[0] < p[1]));
        assert_eq!(word_name(0, 3), "aaa");
        assert_eq!(word_name(27, 2), "bb");
        assert_eq!(name_width(26), 1);
        assert_eq!(name_width(27), 2);
    }

    #[test]
    fn deterministic_per_seed() {
        let p = SyntheticParams {
            seed: 7,
            docs: 200,
            ..Default::default()
        };
        assert_eq!(
            generate_synthetic(&p).unwrap(),
            generate_synthetic(&p).unwrap()
        );
        let other = SyntheticParams {
            seed: 8,
            ..p.clone()
        };
        assert_ne!(
            generate_synthetic(&p).unwrap().0,
            generate_synthetic(&other).unwrap().0
        );
    }

    #[test]
    fn stratified_split() {
        let p = SyntheticParams {
            classes: 3,
            docs: 100,
            ..Default::default()
        };
        let (train, test) = generate_synthetic(&p).unwrap();
        assert_eq!(train.len() + test.len(), 100);
        let per_class = |c: &Corpus, k| c.docs.iter().filter(|d| d.label == k).count();
        // 34/33/33 docs per class, 80% of each to train
        assert_eq!(per_class(&train, 0), 27);
        assert_eq!(per_class(&test, 0), 7);
        assert_eq!(per_class(&train, 1), 26);
        assert_eq!(per_class(&test, 2), 7);
    }

    #[test]
    fn maximal_skew_gives_disjoint_vocabularies() {
        let p = SyntheticParams {
            skew: 1.0,
            docs: 100,
            ..Default::default()
        };
        let (train, _) = generate_synthetic(&p).unwrap();
        let vocab = &train.vocabulary;
        for doc in &train.docs {
            for &f in &doc.features {
                let word = vocab.term(f).unwrap();
                let owner = if word < word_name(250, 2).as_str() {
                    0
                } else {
                    1
                };
                assert_eq!(owner, doc.label);
            }
        }
    }

    #[test]
    fn precondition_violations() {
        let bad = [
            SyntheticParams {
                docs: 1,
                ..Default::default()
            },
            SyntheticParams {
                classes: 1,
                ..Default::default()
            },
            SyntheticParams {
                classes: 5,
                vocab_size: 4,
                ..Default::default()
            },
            SyntheticParams {
                skew: 1.5,
                ..Default::default()
            },
            SyntheticParams {
                doc_len: 0,
                ..Default::default()
            },
        ];
        for p in bad {
            assert!(
                matches!(generate_synthetic(&p), Err(CorpusError::InvalidParams(_))),
                "{p:?}"
            );
        }
    }
}
