//! Text ingestion: tokenization, stopword removal, frequency pruning and
//! sparse binary bag-of-words vectors.
//!
//! Corpora come from three places: a 20news-bydate directory tree
//! ([`load_newsgroups`]), the seeded generator ([`generate_synthetic`]) or a
//! cached corpus file ([`read_cache`]). All three produce a train/test pair
//! that shares one [`Vocabulary`] fit on the train split only.

mod cache;
mod newsgroups;
mod synthetic;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

use sha2::{Digest, Sha256};

pub use cache::{read_cache, read_cache_file, write_cache, write_cache_file, CACHE_VERSION};
pub use newsgroups::{load_newsgroups, load_newsgroups_with};
pub use synthetic::{generate_synthetic, SyntheticParams};

/// Default minimum total occurrence count for a term to be kept.
pub const DEFAULT_MIN_COUNT: u64 = 4;

const BUNDLED_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("no term survived stopword removal and frequency pruning")]
    EmptyVocabulary,
    #[error("min_count must be at least 1")]
    InvalidMinCount,
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unexpected corpus layout: {0}")]
    Layout(String),
    #[error("invalid synthetic corpus parameters: {0}")]
    InvalidParams(String),
    #[error("malformed corpus cache (line {line}): {message}")]
    CacheFormat { line: usize, message: String },
}

impl CorpusError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CorpusError::Io {
            path: path.into(),
            source,
        }
    }
}

/// Splits text into lowercase maximal runs of alphabetic characters.
///
/// Everything that is not alphabetic (digits, punctuation, whitespace)
/// separates tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphabetic())
        .filter(|run| !run.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// A set of words excluded from the vocabulary.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The English list shipped with the crate.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_STOPWORDS)
    }

    /// Parses the stopword file format: one word per line, `#` starts a
    /// comment, blank lines ignored. Words are lowercased.
    pub fn parse(text: &str) -> Self {
        let words = text
            .lines()
            .map(|line| line.split('#').next().unwrap_or("").trim())
            .filter(|w| !w.is_empty())
            .map(str::to_lowercase)
            .collect();
        Stopwords(words)
    }

    pub fn from_file(path: impl Into<PathBuf>) -> Result<Self, CorpusError> {
        let path = path.into();
        let text = std::fs::read(&path).map_err(|e| CorpusError::io(&path, e))?;
        Ok(Self::parse(&String::from_utf8_lossy(&text)))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for Stopwords {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Stopwords(iter.into_iter().map(Into::into).collect())
    }
}

/// Term to feature-index map with dense indices in lexicographic term order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, u32>,
    min_count: u64,
}

impl Vocabulary {
    /// Builds a vocabulary from already-counted terms. Terms are sorted and
    /// re-indexed; terms below `min_count` are rejected as a format error by
    /// callers, not silently dropped here.
    pub(crate) fn from_counts(mut entries: Vec<(String, u64)>, min_count: u64) -> Self {
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, (t, _))| (t.clone(), i as u32))
            .collect();
        let (terms, counts) = entries.into_iter().unzip();
        Vocabulary {
            terms,
            counts,
            index,
            min_count,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn index_of(&self, term: &str) -> Option<u32> {
        self.index.get(term).copied()
    }

    pub fn term(&self, index: u32) -> Option<&str> {
        self.terms.get(index as usize).map(String::as_str)
    }

    /// Total train-split occurrence count of the term at `index`.
    pub fn count(&self, index: u32) -> Option<u64> {
        self.counts.get(index as usize).copied()
    }

    /// `(term, count)` pairs in index order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> + '_ {
        self.terms
            .iter()
            .map(String::as_str)
            .zip(self.counts.iter().copied())
    }
}

/// Counts tokens over the train documents and keeps every non-stopword term
/// whose total count reaches `min_count`.
pub fn build_vocabulary<D: AsRef<[String]>>(
    train_docs: &[D],
    stopwords: &Stopwords,
    min_count: u64,
) -> Result<Vocabulary, CorpusError> {
    if min_count == 0 {
        return Err(CorpusError::InvalidMinCount);
    }
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for doc in train_docs {
        for token in doc.as_ref() {
            *counts.entry(token.as_str()).or_insert(0) += 1;
        }
    }
    let kept: Vec<(String, u64)> = counts
        .into_iter()
        .filter(|&(t, c)| c >= min_count && !stopwords.contains(t))
        .map(|(t, c)| (t.to_owned(), c))
        .collect();
    if kept.is_empty() {
        return Err(CorpusError::EmptyVocabulary);
    }
    Ok(Vocabulary::from_counts(kept, min_count))
}

/// Maps tokens to the sorted, deduplicated list of their feature indices.
/// Out-of-vocabulary tokens are dropped.
pub fn vectorize<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary) -> Vec<u32> {
    let mut features: Vec<u32> = tokens
        .iter()
        .filter_map(|t| vocab.index_of(t.as_ref()))
        .collect();
    features.sort_unstable();
    features.dedup();
    features
}

/// A sparse binary document: each listed feature has value 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SparseDoc {
    pub doc_id: usize,
    /// Strictly increasing feature indices.
    pub features: Vec<u32>,
    pub label: usize,
}

impl SparseDoc {
    pub fn new(doc_id: usize, features: Vec<u32>, label: usize) -> Self {
        debug_assert!(features.windows(2).all(|w| w[0] < w[1]));
        SparseDoc {
            doc_id,
            features,
            label,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One split of a labeled corpus. The vocabulary and class names are shared
/// with the sibling split.
#[derive(Clone, Debug, PartialEq)]
pub struct Corpus {
    pub docs: Vec<SparseDoc>,
    pub vocabulary: Arc<Vocabulary>,
    pub class_names: Arc<Vec<String>>,
    pub split: Split,
}

impl Corpus {
    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn num_features(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.docs.iter().map(|d| d.label).collect()
    }

    /// One-vs-rest view of this split: label 1 for `category`, 0 otherwise.
    pub fn binarize(&self, category: usize) -> Corpus {
        let name = self
            .class_names
            .get(category)
            .cloned()
            .unwrap_or_else(|| category.to_string());
        let docs = self
            .docs
            .iter()
            .map(|d| SparseDoc {
                doc_id: d.doc_id,
                features: d.features.clone(),
                label: usize::from(d.label == category),
            })
            .collect();
        Corpus {
            docs,
            vocabulary: Arc::clone(&self.vocabulary),
            class_names: Arc::new(vec![format!("not {name}"), name]),
            split: self.split,
        }
    }
}

/// Builds a train/test pair from tokenized documents, fitting the vocabulary
/// on the train split only.
pub fn corpora_from_tokens(
    class_names: Vec<String>,
    train: &[(Vec<String>, usize)],
    test: &[(Vec<String>, usize)],
    stopwords: &Stopwords,
    min_count: u64,
) -> Result<(Corpus, Corpus), CorpusError> {
    let token_lists: Vec<&[String]> = train.iter().map(|(t, _)| t.as_slice()).collect();
    let vocabulary = Arc::new(build_vocabulary(&token_lists, stopwords, min_count)?);
    let class_names = Arc::new(class_names);
    let make = |docs: &[(Vec<String>, usize)], split| Corpus {
        docs: docs
            .iter()
            .enumerate()
            .map(|(id, (tokens, label))| SparseDoc::new(id, vectorize(tokens, &vocabulary), *label))
            .collect(),
        vocabulary: Arc::clone(&vocabulary),
        class_names: Arc::clone(&class_names),
        split,
    };
    Ok((make(train, Split::Train), make(test, Split::Test)))
}

/// Short content hash over vocabulary, class names and both splits.
pub fn fingerprint(train: &Corpus, test: &Corpus) -> String {
    let mut hasher = Sha256::new();
    for name in train.class_names.iter() {
        hasher.update(name.as_bytes());
        hasher.update([0u8]);
    }
    for (term, count) in train.vocabulary.iter() {
        hasher.update(term.as_bytes());
        hasher.update(count.to_le_bytes());
    }
    for corpus in [train, test] {
        hasher.update(corpus.split.as_str().as_bytes());
        for doc in &corpus.docs {
            hasher.update((doc.doc_id as u64).to_le_bytes());
            hasher.update((doc.label as u64).to_le_bytes());
            hasher.update((doc.features.len() as u64).to_le_bytes());
            for f in &doc.features {
                hasher.update(f.to_le_bytes());
            }
        }
    }
    let digest = hasher.finalize();
    hex::encode(&digest[..8])
}
