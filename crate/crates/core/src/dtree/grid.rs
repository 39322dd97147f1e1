use rayon::prelude::*;

use super::{grow, Criterion, DecisionTree, Samples, TrainParams, TreeError};
use crate::featurize::FeatureVector;

#[derive(Clone, Debug)]
pub struct GridResult {
    pub tree: DecisionTree,
    pub params: TrainParams,
    pub valid_accuracy: f64,
}

/// Trains one tree per configuration (in parallel) and keeps the one with
/// the best validation accuracy. Ties prefer the smaller depth, then gini,
/// then the smaller `min_leaf`, then grid order.
pub fn grid_search(
    train: &Samples<'_>,
    valid_rows: &[FeatureVector],
    valid_labels: &[Option<usize>],
    grid: &[TrainParams],
) -> Result<GridResult, TreeError> {
    if grid.is_empty() {
        return Err(TreeError::EmptyGrid);
    }
    if valid_rows.is_empty() {
        return Err(TreeError::EmptyValidation);
    }
    for p in grid {
        p.validate()?;
    }
    let trained: Vec<(usize, DecisionTree, f64)> = grid
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let tree = grow(train, p)?;
            let acc = tree
                .accuracy(valid_rows, valid_labels)
                .ok_or(TreeError::EmptyValidation)?;
            Ok((i, tree, acc))
        })
        .collect::<Result<_, TreeError>>()?;

    let rank = |p: &TrainParams| (p.max_depth, p.criterion != Criterion::Gini, p.min_leaf);
    let (_, tree, acc) = trained
        .into_iter()
        .reduce(|a, b| {
            let (pa, pb) = (&grid[a.0], &grid[b.0]);
            let keep_a = a.2 > b.2 || (a.2 == b.2 && (rank(pa), a.0) <= (rank(pb), b.0));
            if keep_a {
                a
            } else {
                b
            }
        })
        .expect("grid is nonempty");
    Ok(GridResult {
        params: tree.params,
        tree,
        valid_accuracy: acc,
    })
}
