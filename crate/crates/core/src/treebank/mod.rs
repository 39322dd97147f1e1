//! In-memory treebank corpora.
//!
//! A [`Corpus`] is a list of dependency-parsed [`Sentence`]s read from
//! CoNLL-U (or produced by the synthetic generator in [`synthetic`]).
//! Only basic syntactic-word rows are kept: multiword-token ranges and
//! empty nodes are dropped while parsing.

mod conllu;
pub mod synthetic;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use conllu::{parse_conllu, write_conllu};
pub use synthetic::{generate_synthetic, Order, PlantedRule};

#[derive(Debug, Error)]
pub enum TreebankError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    InFile {
        path: String,
        #[source]
        source: Box<TreebankError>,
    },
}

impl TreebankError {
    pub(crate) fn parse(line: usize, reason: impl Into<String>) -> Self {
        TreebankError::Parse {
            line,
            reason: reason.into(),
        }
    }
}

/// Morphological attribute/value pairs, ordered by attribute name.
pub type Morph = BTreeMap<String, String>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    /// 1-based position in the sentence.
    pub id: usize,
    pub form: String,
    pub lemma: Option<String>,
    pub upos: Option<String>,
    pub xpos: Option<String>,
    pub morph: Morph,
    /// Id of the syntactic head, 0 for the root.
    pub head: usize,
    pub deprel: Option<String>,
}

impl Token {
    pub fn feature(&self, attr: &str) -> Option<&str> {
        self.morph.get(attr).map(String::as_str)
    }

    pub fn is_root(&self) -> bool {
        self.head == 0
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    pub text: Option<String>,
}

impl Sentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Token by 1-based id.
    pub fn token(&self, id: usize) -> Option<&Token> {
        id.checked_sub(1).and_then(|i| self.tokens.get(i))
    }

    /// Dependents of `id`, in surface order.
    pub fn children(&self, id: usize) -> impl Iterator<Item = &Token> {
        self.tokens.iter().filter(move |t| t.head == id)
    }

    /// Checks the structural invariants: ids are exactly `1..=n`, heads are
    /// in range and not self-loops, and at least one token hangs off the root.
    pub fn validate(&self) -> Result<(), String> {
        let n = self.tokens.len();
        if n == 0 {
            return Err("sentence has no tokens".into());
        }
        for (i, tok) in self.tokens.iter().enumerate() {
            if tok.id != i + 1 {
                return Err(format!("expected token id {}, found {}", i + 1, tok.id));
            }
            if tok.head > n {
                return Err(format!(
                    "token {} has head {} outside sentence of length {}",
                    tok.id, tok.head, n
                ));
            }
            if tok.head == tok.id {
                return Err(format!("token {} is its own head", tok.id));
            }
            for (k, v) in &tok.morph {
                if k.is_empty() || v.is_empty() {
                    return Err(format!(
                        "token {} has an empty morphological feature",
                        tok.id
                    ));
                }
            }
        }
        if !self.tokens.iter().any(Token::is_root) {
            return Err("sentence has no root token".into());
        }
        Ok(())
    }

    /// Surface text: the `# text =` comment if present, otherwise forms joined by spaces.
    pub fn surface(&self) -> String {
        match &self.text {
            Some(t) => t.clone(),
            None => self
                .tokens
                .iter()
                .map(|t| t.form.as_str())
                .collect::<Vec<_>>()
                .join(" "),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    #[default]
    Train,
    Valid,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub sentences: Vec<Sentence>,
    pub language: String,
    pub treebank_id: String,
    pub split: Split,
}

impl Corpus {
    pub fn new(sentences: Vec<Sentence>, split: Split) -> Self {
        Corpus {
            sentences,
            split,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn with_identity(mut self, language: &str, treebank_id: &str) -> Self {
        self.language = language.to_string();
        self.treebank_id = treebank_id.to_string();
        self
    }
}

/// Reads one CoNLL-U file and tags it with `split`.
pub fn load_corpus(path: &Path, split: Split) -> Result<Corpus, TreebankError> {
    let file = std::fs::File::open(path).map_err(|source| TreebankError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut corpus =
        parse_conllu(std::io::BufReader::new(file)).map_err(|e| TreebankError::InFile {
            path: path.display().to_string(),
            source: Box::new(e),
        })?;
    corpus.split = split;
    let (language, treebank_id) = identity_from_path(path);
    corpus.language = language;
    corpus.treebank_id = treebank_id;
    Ok(corpus)
}

/// Reads the train, validation and test files of one treebank.
pub fn load_split(train: &Path, valid: &Path, test: &Path) -> Result<[Corpus; 3], TreebankError> {
    Ok([
        load_corpus(train, Split::Train)?,
        load_corpus(valid, Split::Valid)?,
        load_corpus(test, Split::Test)?,
    ])
}

/// Guesses `(language, treebank id)` from UD/SUD file names such as
/// `es_gsd-sud-train.conllu`.
fn identity_from_path(path: &Path) -> (String, String) {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let treebank = stem.split('-').next().unwrap_or("").to_string();
    let language = treebank.split('_').next().unwrap_or("").to_string();
    (language, treebank)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_from_sud_file_name() {
        let (lang, tb) = identity_from_path(Path::new("/data/es_gsd-sud-train.conllu"));
        assert_eq!(lang, "es");
        assert_eq!(tb, "es_gsd");
    }

    #[test]
    fn missing_file_names_path() {
        let err = load_corpus(Path::new("/nonexistent/test.conllu"), Split::Test).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/test.conllu"));
    }
}
