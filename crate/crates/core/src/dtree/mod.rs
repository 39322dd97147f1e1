//! Single CART-style classification tree over sparse feature vectors.
//!
//! Binary features split on presence, numeric features on a threshold.
//! Growth is greedy and deterministic; every node keeps its per-label
//! training counts so leaves can later be tested for significance.

mod grid;
mod impurity;
mod split;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::featurize::{FeatureKind, FeatureVector};

pub use grid::{grid_search, GridResult};
pub use impurity::{impurity, Criterion};
pub use split::{best_split, Split, SplitTest, GAIN_TOLERANCE};

/// Depths searched by [`TrainParams::full_grid`].
pub const GRID_DEPTHS: [usize; 10] = [3, 4, 5, 6, 7, 8, 9, 10, 15, 20];

#[derive(Debug, Error, PartialEq)]
pub enum TreeError {
    #[error("empty node")]
    EmptyNode,
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("empty hyperparameter grid")]
    EmptyGrid,
    #[error("empty validation set")]
    EmptyValidation,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("training label {0} outside the label set")]
    LabelOutOfRange(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TrainParams {
    pub criterion: Criterion,
    pub max_depth: usize,
    #[serde(default = "one")]
    pub min_leaf: usize,
}

fn one() -> usize {
    1
}

impl TrainParams {
    pub fn new(criterion: Criterion, max_depth: usize) -> Self {
        TrainParams {
            criterion,
            max_depth,
            min_leaf: 1,
        }
    }

    /// A depth-0 tree: a single leaf predicting the majority label.
    pub fn baseline() -> Self {
        TrainParams::new(Criterion::Gini, 0)
    }

    pub fn validate(&self) -> Result<(), TreeError> {
        if self.max_depth == 0 {
            return Err(TreeError::InvalidParams(
                "max_depth must be at least 1".into(),
            ));
        }
        if self.min_leaf == 0 {
            return Err(TreeError::InvalidParams(
                "min_leaf must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Both criteria crossed with [`GRID_DEPTHS`].
    pub fn full_grid() -> Vec<TrainParams> {
        [Criterion::Gini, Criterion::Entropy]
            .into_iter()
            .flat_map(|c| GRID_DEPTHS.into_iter().map(move |d| TrainParams::new(c, d)))
            .collect()
    }
}

/// Borrowed training matrix: sparse rows, label indices and feature kinds.
#[derive(Clone, Copy, Debug)]
pub struct Samples<'a> {
    pub rows: &'a [FeatureVector],
    pub labels: &'a [usize],
    pub kinds: &'a [FeatureKind],
    pub label_names: &'a [String],
}

impl Samples<'_> {
    pub fn n_labels(&self) -> usize {
        self.label_names.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Significance verdict attached to a leaf.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub p_value: f64,
    /// Assigned label index, `None` for cannot-decide.
    pub label: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum NodeKind {
    Internal {
        split: Split,
        /// Child for rows failing the test (absent / below threshold).
        fail: usize,
        pass: usize,
    },
    Leaf {
        verdict: Option<Verdict>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub counts: Vec<usize>,
    pub depth: usize,
    pub kind: NodeKind,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf { .. })
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Index of the largest count; ties go to the lowest index.
    pub fn majority(&self) -> usize {
        majority(&self.counts)
    }

    pub fn verdict(&self) -> Option<Verdict> {
        match self.kind {
            NodeKind::Leaf { verdict } => verdict,
            NodeKind::Internal { .. } => None,
        }
    }
}

pub(crate) fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub leaf: usize,
    pub label: usize,
    pub distribution: Vec<f64>,
}

/// Nodes are stored in preorder; node 0 is the root.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
    pub label_order: Vec<String>,
    pub params: TrainParams,
}

impl DecisionTree {
    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn leaves(&self) -> impl Iterator<Item = (usize, &Node)> {
        self.nodes.iter().enumerate().filter(|(_, n)| n.is_leaf())
    }

    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    pub fn leaf_of(&self, row: &FeatureVector) -> usize {
        let mut at = 0;
        loop {
            match &self.nodes[at].kind {
                NodeKind::Leaf { .. } => return at,
                NodeKind::Internal { split, fail, pass } => {
                    at = if split.passes(row) { *pass } else { *fail };
                }
            }
        }
    }

    pub fn predict(&self, row: &FeatureVector) -> Prediction {
        let leaf = self.leaf_of(row);
        let node = &self.nodes[leaf];
        let total = node.total().max(1) as f64;
        Prediction {
            leaf,
            label: node.majority(),
            distribution: node.counts.iter().map(|&c| c as f64 / total).collect(),
        }
    }

    /// Root-to-leaf path as (internal node, took the pass branch) pairs.
    pub fn path_to(&self, leaf: usize) -> Vec<(usize, bool)> {
        fn walk(
            tree: &DecisionTree,
            at: usize,
            target: usize,
            path: &mut Vec<(usize, bool)>,
        ) -> bool {
            if at == target {
                return true;
            }
            if let NodeKind::Internal { fail, pass, .. } = tree.nodes[at].kind {
                for (child, passed) in [(fail, false), (pass, true)] {
                    path.push((at, passed));
                    if walk(tree, child, target, path) {
                        return true;
                    }
                    path.pop();
                }
            }
            false
        }
        let mut path = Vec::new();
        walk(self, 0, leaf, &mut path);
        path
    }

    /// Fraction of rows whose majority prediction equals the label; rows
    /// with labels unknown to the tree count as errors.
    pub fn accuracy(&self, rows: &[FeatureVector], labels: &[Option<usize>]) -> Option<f64> {
        if rows.is_empty() {
            return None;
        }
        let correct = rows
            .iter()
            .zip(labels)
            .filter(|(r, l)| Some(self.predict(r).label) == **l)
            .count();
        Some(correct as f64 / rows.len() as f64)
    }
}

/// Grows a tree greedily until purity, `max_depth`, `min_leaf`, or no
/// positive-gain split.
pub fn grow(samples: &Samples<'_>, params: &TrainParams) -> Result<DecisionTree, TreeError> {
    if samples.is_empty() {
        return Err(TreeError::EmptyTrainingSet);
    }
    if params.min_leaf == 0 {
        return Err(TreeError::InvalidParams(
            "min_leaf must be at least 1".into(),
        ));
    }
    if let Some(&bad) = samples.labels.iter().find(|&&l| l >= samples.n_labels()) {
        return Err(TreeError::LabelOutOfRange(bad));
    }
    let mut tree = DecisionTree {
        nodes: Vec::new(),
        label_order: samples.label_names.to_vec(),
        params: *params,
    };
    let rows: Vec<usize> = (0..samples.len()).collect();
    build(samples, params, &mut tree.nodes, rows, 0);
    Ok(tree)
}

fn build(
    samples: &Samples<'_>,
    params: &TrainParams,
    nodes: &mut Vec<Node>,
    rows: Vec<usize>,
    depth: usize,
) -> usize {
    let mut counts = vec![0; samples.n_labels()];
    for &r in &rows {
        counts[samples.labels[r]] += 1;
    }
    let id = nodes.len();
    nodes.push(Node {
        counts,
        depth,
        kind: NodeKind::Leaf { verdict: None },
    });

    if depth >= params.max_depth || rows.len() < 2 * params.min_leaf {
        return id;
    }
    let Some((split, _)) = best_split(samples, &rows, params.criterion, params.min_leaf) else {
        return id;
    };
    let (pass_rows, fail_rows): (Vec<usize>, Vec<usize>) = rows
        .into_iter()
        .partition(|&r| split.passes(&samples.rows[r]));
    let fail = build(samples, params, nodes, fail_rows, depth + 1);
    let pass = build(samples, params, nodes, pass_rows, depth + 1);
    nodes[id].kind = NodeKind::Internal { split, fail, pass };
    id
}
