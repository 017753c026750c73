use std::fs;
use std::path::{Path, PathBuf};

use super::{corpora_from_tokens, tokenize, Corpus, CorpusError, Stopwords, DEFAULT_MIN_COUNT};

/// Loads a 20news-bydate tree (`<root>/{train,test}/<category>/<file>`) with
/// the bundled stopword list and the default frequency cutoff.
pub fn load_newsgroups(root: impl AsRef<Path>) -> Result<(Corpus, Corpus), CorpusError> {
    load_newsgroups_with(root, &Stopwords::bundled(), DEFAULT_MIN_COUNT)
}

pub fn load_newsgroups_with(
    root: impl AsRef<Path>,
    stopwords: &Stopwords,
    min_count: u64,
) -> Result<(Corpus, Corpus), CorpusError> {
    let root = root.as_ref();
    let train_dir = root.join("train");
    let test_dir = root.join("test");
    if !train_dir.is_dir() {
        return Err(CorpusError::Layout(format!(
            "{} has no train/ directory",
            root.display()
        )));
    }
    let categories = sorted_entries(&train_dir, true)?;
    if categories.is_empty() {
        return Err(CorpusError::Layout(format!(
            "no category directories under {}",
            train_dir.display()
        )));
    }
    let class_names: Vec<String> = categories
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();

    let train = read_split(&train_dir, &class_names)?;
    let test = if test_dir.is_dir() {
        let test_categories = sorted_entries(&test_dir, true)?;
        for dir in &test_categories {
            let name = dir.file_name().unwrap().to_string_lossy();
            if !class_names.iter().any(|c| *c == name) {
                return Err(CorpusError::Layout(format!(
                    "test category {name} has no train counterpart"
                )));
            }
        }
        read_split(&test_dir, &class_names)?
    } else {
        Vec::new()
    };
    log::info!(
        "loaded {} train / {} test documents in {} categories from {}",
        train.len(),
        test.len(),
        class_names.len(),
        root.display()
    );
    corpora_from_tokens(class_names, &train, &test, stopwords, min_count)
}

fn read_split(
    split_dir: &Path,
    class_names: &[String],
) -> Result<Vec<(Vec<String>, usize)>, CorpusError> {
    let mut docs = Vec::new();
    for (label, name) in class_names.iter().enumerate() {
        let dir = split_dir.join(name);
        if !dir.is_dir() {
            continue;
        }
        for file in sorted_entries(&dir, false)? {
            let bytes = fs::read(&file).map_err(|e| CorpusError::io(&file, e))?;
            docs.push((tokenize(&String::from_utf8_lossy(&bytes)), label));
        }
    }
    Ok(docs)
}

fn sorted_entries(dir: &Path, want_dirs: bool) -> Result<Vec<PathBuf>, CorpusError> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| CorpusError::io(dir, e))? {
        let path = entry.map_err(|e| CorpusError::io(dir, e))?.path();
        if path.is_dir() == want_dirs {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(root: &Path, rel: &str, text: &str) {
        let path = root.join(rel);
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(path, text).unwrap();
    }

    #[test]
    fn two_category_fixture() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        for i in 0..3 {
            write(
                root,
                &format!("train/sci.space/{i}"),
                "orbit orbit rocket launch",
            );
            write(
                root,
                &format!("train/rec.autos/{i}"),
                "engine wheel engine brake",
            );
        }
        write(root, "test/sci.space/9", "rocket engine zebra");
        write(root, "test/rec.autos/8", "\u{fffd}\u{ff}brake");

        let (train, test) = load_newsgroups_with(root, &Stopwords::empty(), 3).unwrap();
        assert_eq!(train.len(), 6);
        assert_eq!(train.num_classes(), 2);
        assert_eq!(train.class_names.as_slice(), ["rec.autos", "sci.space"]);
        assert_eq!(test.len(), 2);
        // wheel/brake/launch appear exactly 3 times, orbit/engine 6
        assert_eq!(train.num_features(), 6);
        assert_eq!(train.docs[0].label, 0);
        assert_eq!(train.docs[5].label, 1);
        assert_eq!(test.docs[0].label, 0);
        let vocab = &train.vocabulary;
        assert_eq!(
            test.docs[1].features,
            vec![
                vocab.index_of("engine").unwrap(),
                vocab.index_of("rocket").unwrap()
            ]
        );
    }

    #[test]
    fn invalid_utf8_is_replaced() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        fs::create_dir_all(root.join("train/a")).unwrap();
        fs::create_dir_all(root.join("train/b")).unwrap();
        fs::write(root.join("train/a/1"), b"hello\xffworld").unwrap();
        fs::write(root.join("train/b/1"), b"world").unwrap();
        let (train, _) = load_newsgroups_with(root, &Stopwords::empty(), 1).unwrap();
        assert_eq!(train.num_features(), 2);
        assert_eq!(train.docs[0].features, vec![0, 1]);
    }

    #[test]
    fn empty_directory_is_layout_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_newsgroups(dir.path()),
            Err(CorpusError::Layout(_))
        ));
        fs::create_dir_all(dir.path().join("train")).unwrap();
        assert!(matches!(
            load_newsgroups(dir.path()),
            Err(CorpusError::Layout(_))
        ));
    }
}
