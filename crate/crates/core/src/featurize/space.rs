use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Binary,
    Numeric,
}

/// A feature as produced by the extractors, before it is given an id.
#[derive(Clone, Debug, PartialEq)]
pub struct NamedFeature {
    pub name: String,
    pub kind: FeatureKind,
    pub value: f64,
    /// Human-readable rendering; `None` means the name itself.
    pub display: Option<String>,
}

impl NamedFeature {
    pub fn binary(name: String) -> Self {
        NamedFeature {
            name,
            kind: FeatureKind::Binary,
            value: 1.0,
            display: None,
        }
    }
}

/// Sparse feature values, sorted by id with no duplicates.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(Vec<(usize, f64)>);

impl FeatureVector {
    pub fn new(mut entries: Vec<(usize, f64)>) -> Self {
        entries.sort_by_key(|e| e.0);
        entries.dedup_by_key(|e| e.0);
        FeatureVector(entries)
    }

    pub fn get(&self, id: usize) -> Option<f64> {
        self.0
            .binary_search_by_key(&id, |e| e.0)
            .ok()
            .map(|i| self.0[i].1)
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Bidirectional mapping between feature names and dense ids. Ids follow
/// the lexicographic order of names, so rebuilding from the same data
/// yields the same space.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeatureSpace {
    names: Vec<String>,
    kinds: Vec<FeatureKind>,
    display: Vec<String>,
    index: HashMap<String, usize>,
}

impl FeatureSpace {
    pub(crate) fn from_features<'a>(features: impl IntoIterator<Item = &'a NamedFeature>) -> Self {
        let mut seen: BTreeMap<&str, (FeatureKind, Option<&str>)> = BTreeMap::new();
        for f in features {
            seen.entry(f.name.as_str())
                .or_insert((f.kind, f.display.as_deref()));
        }
        let mut space = FeatureSpace::default();
        for (id, (name, (kind, display))) in seen.into_iter().enumerate() {
            space.names.push(name.to_string());
            space.kinds.push(kind);
            space.display.push(display.unwrap_or(name).to_string());
            space.index.insert(name.to_string(), id);
        }
        space
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn kind(&self, id: usize) -> FeatureKind {
        self.kinds[id]
    }

    pub fn kinds(&self) -> &[FeatureKind] {
        &self.kinds
    }

    pub fn display(&self, id: usize) -> &str {
        &self.display[id]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Maps named features into this space, dropping names it does not know.
    pub fn vectorize(&self, features: &[NamedFeature]) -> FeatureVector {
        FeatureVector::new(
            features
                .iter()
                .filter_map(|f| self.id(&f.name).map(|id| (id, f.value)))
                .collect(),
        )
    }
}
