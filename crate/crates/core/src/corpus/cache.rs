//! Cached corpus file: a tab-separated, line-oriented dump of a train/test
//! pair.
//!
//! ```text
//! alstop-corpus<TAB>1
//! classes<TAB><C>
//! <class name>                       (C lines)
//! vocab<TAB><V><TAB><min_count>
//! <term><TAB><count>                 (V lines, index order)
//! train<TAB><N>
//! <doc_id><TAB><label><TAB><f1 f2 ...>   (N lines)
//! test<TAB><M>
//! <doc_id><TAB><label><TAB><f1 f2 ...>   (M lines)
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use super::{Corpus, CorpusError, SparseDoc, Split, Vocabulary};

pub const CACHE_VERSION: u32 = 1;
const MAGIC: &str = "alstop-corpus";

pub fn write_cache<W: Write>(out: W, train: &Corpus, test: &Corpus) -> std::io::Result<()> {
    let mut out = BufWriter::new(out);
    writeln!(out, "{MAGIC}\t{CACHE_VERSION}")?;
    writeln!(out, "classes\t{}", train.class_names.len())?;
    for name in train.class_names.iter() {
        writeln!(out, "{name}")?;
    }
    let vocab = &train.vocabulary;
    writeln!(out, "vocab\t{}\t{}", vocab.len(), vocab.min_count())?;
    for (term, count) in vocab.iter() {
        writeln!(out, "{term}\t{count}")?;
    }
    for corpus in [train, test] {
        writeln!(out, "{}\t{}", corpus.split, corpus.docs.len())?;
        for doc in &corpus.docs {
            write!(out, "{}\t{}\t", doc.doc_id, doc.label)?;
            for (i, f) in doc.features.iter().enumerate() {
                if i > 0 {
                    out.write_all(b" ")?;
                }
                write!(out, "{f}")?;
            }
            out.write_all(b"\n")?;
        }
    }
    out.flush()
}

pub fn write_cache_file(
    path: impl AsRef<Path>,
    train: &Corpus,
    test: &Corpus,
) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| CorpusError::io(path, e))?;
    write_cache(file, train, test).map_err(|e| CorpusError::io(path, e))
}

pub fn read_cache_file(path: impl AsRef<Path>) -> Result<(Corpus, Corpus), CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| CorpusError::io(path, e))?;
    read_cache(BufReader::new(file)).map_err(|e| match e {
        CorpusError::Io { source, .. } => CorpusError::io(path, source),
        other => other,
    })
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self) -> Result<String, CorpusError> {
        self.line += 1;
        match self.inner.next() {
            Some(Ok(l)) => Ok(l),
            Some(Err(e)) => Err(CorpusError::io("<cache>", e)),
            None => Err(self.err("unexpected end of file")),
        }
    }

    fn err(&self, message: impl Into<String>) -> CorpusError {
        CorpusError::CacheFormat {
            line: self.line,
            message: message.into(),
        }
    }

    fn header(&mut self, key: &str) -> Result<Vec<String>, CorpusError> {
        let line = self.next()?;
        let mut parts = line.split('\t');
        if parts.next() != Some(key) {
            return Err(self.err(format!("expected `{key}` header")));
        }
        Ok(parts.map(str::to_owned).collect())
    }

    fn number<T: std::str::FromStr>(&self, s: Option<&String>) -> Result<T, CorpusError> {
        s.and_then(|v| v.parse().ok())
            .ok_or_else(|| self.err("expected a non-negative integer"))
    }
}

pub fn read_cache<R: BufRead>(input: R) -> Result<(Corpus, Corpus), CorpusError> {
    let mut lines = Lines {
        inner: input.lines(),
        line: 0,
    };
    let magic = lines.header(MAGIC)?;
    let version: u32 = lines.number(magic.first())?;
    if version != CACHE_VERSION {
        return Err(lines.err(format!("unsupported cache version {version}")));
    }

    let classes_header = lines.header("classes")?;
    let n_classes: usize = lines.number(classes_header.first())?;
    let mut class_names = Vec::with_capacity(n_classes);
    for _ in 0..n_classes {
        class_names.push(lines.next()?);
    }

    let vocab_header = lines.header("vocab")?;
    let n_terms: usize = lines.number(vocab_header.first())?;
    let min_count: u64 = lines.number(vocab_header.get(1))?;
    let mut entries: Vec<(String, u64)> = Vec::with_capacity(n_terms);
    for _ in 0..n_terms {
        let line = lines.next()?;
        let (term, count) = line
            .split_once('\t')
            .ok_or_else(|| lines.err("expected `term<TAB>count`"))?;
        let count: u64 = count.parse().map_err(|_| lines.err("bad term count"))?;
        if count < min_count {
            return Err(lines.err(format!("term {term} below min_count")));
        }
        if let Some((prev, _)) = entries.last() {
            if prev.as_str() >= term {
                return Err(lines.err("terms not in strictly increasing order"));
            }
        }
        entries.push((term.to_owned(), count));
    }
    let vocabulary = Arc::new(Vocabulary::from_counts(entries, min_count));
    let class_names = Arc::new(class_names);

    let mut read_split = |split: Split| -> Result<Corpus, CorpusError> {
        let split_header = lines.header(split.as_str())?;
        let n_docs: usize = lines.number(split_header.first())?;
        let mut docs = Vec::with_capacity(n_docs);
        for _ in 0..n_docs {
            let line = lines.next()?;
            let mut parts = line.splitn(3, '\t');
            let doc_id = parts.next().and_then(|s| s.parse().ok());
            let label = parts.next().and_then(|s| s.parse().ok());
            let (Some(doc_id), Some(label)) = (doc_id, label) else {
                return Err(lines.err("bad document id or label"));
            };
            if label >= n_classes {
                return Err(lines.err(format!("label {label} out of range")));
            }
            let features = parts
                .next()
                .unwrap_or("")
                .split_ascii_whitespace()
                .map(|f| f.parse::<u32>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| lines.err("bad feature index"))?;
            if !features.windows(2).all(|w| w[0] < w[1])
                || features.last().is_some_and(|&f| f as usize >= n_terms)
            {
                return Err(lines.err("features must be strictly increasing and < V"));
            }
            docs.push(SparseDoc::new(doc_id, features, label));
        }
        Ok(Corpus {
            docs,
            vocabulary: Arc::clone(&vocabulary),
            class_names: Arc::clone(&class_names),
            split,
        })
    };
    let train = read_split(Split::Train)?;
    let test = read_split(Split::Test)?;
    Ok((train, test))
}
