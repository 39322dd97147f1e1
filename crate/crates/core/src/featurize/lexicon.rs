use std::collections::{BTreeMap, HashMap};
use std::io::BufRead;
use std::path::Path;

use super::FeatureError;

pub const DEFAULT_TOP_K: usize = 5;

/// Sparse non-negative word vectors with a top-k word list per dimension.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseLexicon {
    dims: usize,
    vectors: HashMap<String, Vec<f64>>,
    /// Top words of every retained (not all-zero) dimension.
    dim_labels: BTreeMap<usize, Vec<String>>,
}

impl SparseLexicon {
    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(word).map(Vec::as_slice)
    }

    /// Top words of dimension `d`, or `None` if the dimension was dropped.
    pub fn dim_label(&self, d: usize) -> Option<&[String]> {
        self.dim_labels.get(&d).map(Vec::as_slice)
    }

    pub fn retained_dims(&self) -> impl Iterator<Item = usize> + '_ {
        self.dim_labels.keys().copied()
    }

    /// `{w1,w2,...}` rendering of a dimension's word list.
    pub fn render_dim(&self, d: usize) -> String {
        format!("{{{}}}", self.dim_label(d).unwrap_or(&[]).join(","))
    }

    pub fn from_vectors(vectors: Vec<(String, Vec<f64>)>, k: usize) -> Result<Self, FeatureError> {
        let dims = vectors.first().map_or(0, |(_, v)| v.len());
        let mut map = HashMap::with_capacity(vectors.len());
        for (i, (word, v)) in vectors.into_iter().enumerate() {
            if v.len() != dims {
                return Err(FeatureError::Lexicon {
                    line: i + 1,
                    reason: format!("expected {dims} values, found {}", v.len()),
                });
            }
            if let Some(x) = v.iter().find(|x| !x.is_finite() || **x < 0.0) {
                return Err(FeatureError::Lexicon {
                    line: i + 1,
                    reason: format!("value {x} is not a finite non-negative number"),
                });
            }
            map.insert(word, v);
        }
        let mut lex = SparseLexicon {
            dims,
            vectors: map,
            dim_labels: BTreeMap::new(),
        };
        lex.label_dims(k);
        Ok(lex)
    }

    fn label_dims(&mut self, k: usize) {
        for d in 0..self.dims {
            let mut scored: Vec<(&str, f64)> = self
                .vectors
                .iter()
                .filter(|(_, v)| v[d] > 0.0)
                .map(|(w, v)| (w.as_str(), v[d]))
                .collect();
            if scored.is_empty() {
                continue;
            }
            scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
            let words = scored
                .into_iter()
                .take(k)
                .map(|(w, _)| w.to_string())
                .collect();
            self.dim_labels.insert(d, words);
        }
    }
}

/// Reads `word v1 v2 ... vD` rows; every row must have the arity of the first.
pub fn parse_sparse_lexicon<R: BufRead>(input: R, k: usize) -> Result<SparseLexicon, FeatureError> {
    let mut rows = Vec::new();
    let mut dims = None;
    for (idx, line) in input.lines().enumerate() {
        let lineno = idx + 1;
        let err = |reason: String| FeatureError::Lexicon {
            line: lineno,
            reason,
        };
        let line = line.map_err(|e| err(e.to_string()))?;
        let mut parts = line.split_whitespace();
        let Some(word) = parts.next() else { continue };
        let values = parts
            .map(|p| {
                p.parse::<f64>()
                    .map_err(|_| err(format!("invalid value {p:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let expected = *dims.get_or_insert(values.len());
        if values.len() != expected || expected == 0 {
            return Err(err(format!(
                "expected {expected} values, found {}",
                values.len()
            )));
        }
        if let Some(x) = values.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(err(format!(
                "value {x} is not a finite non-negative number"
            )));
        }
        rows.push((word.to_string(), values));
    }
    SparseLexicon::from_vectors(rows, k)
}

pub fn load_sparse_lexicon(path: &Path, k: usize) -> Result<SparseLexicon, FeatureError> {
    let file = std::fs::File::open(path).map_err(|source| FeatureError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_sparse_lexicon(std::io::BufReader::new(file), k)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SRC: &str = "\
hotel 0.0 0.9 0.0
restaurante 0.0 0.8 0.0
ochenta 0.7 0.0 0.0
sesenta 0.6 0.1 0.0
cuatro 0.5 0.0 0.0
";

    #[test]
    fn top_k_words_per_dimension() {
        let lex = parse_sparse_lexicon(SRC.as_bytes(), 2).unwrap();
        assert_eq!(lex.render_dim(1), "{hotel,restaurante}");
        assert_eq!(lex.render_dim(0), "{ochenta,sesenta}");
    }

    #[test]
    fn all_zero_dimension_dropped() {
        let lex = parse_sparse_lexicon(SRC.as_bytes(), 2).unwrap();
        assert!(lex.dim_label(2).is_none());
        assert_eq!(lex.retained_dims().collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn ties_broken_lexicographically() {
        let lex = parse_sparse_lexicon("b 1.0\na 1.0\nc 1.0\n".as_bytes(), 2).unwrap();
        assert_eq!(
            lex.dim_label(0).unwrap(),
            &["a".to_string(), "b".to_string()]
        );
    }

    #[test]
    fn empty_file_empty_lexicon() {
        let lex = parse_sparse_lexicon("".as_bytes(), 5).unwrap();
        assert!(lex.is_empty());
        assert_eq!(lex.retained_dims().count(), 0);
    }

    #[test]
    fn wrong_arity_and_negative_values() {
        let err = parse_sparse_lexicon("a 1 2\nb 1\n".as_bytes(), 5).unwrap_err();
        assert!(matches!(err, FeatureError::Lexicon { line: 2, .. }));
        let err = parse_sparse_lexicon("a 1 2\nb 1 -0.5\n".as_bytes(), 5).unwrap_err();
        assert!(matches!(err, FeatureError::Lexicon { line: 2, .. }));
    }
}
