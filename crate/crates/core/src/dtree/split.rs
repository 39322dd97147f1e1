use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::impurity::{impurity_of, Criterion};
use super::Samples;
use crate::featurize::{FeatureKind, FeatureVector};

/// Two candidate decreases closer than this are treated as equal, so the
/// lower feature id (then threshold) wins.
pub const GAIN_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitTest {
    /// Passes when the binary feature is present.
    Present,
    /// Passes when the numeric value (0 if absent) is at least the threshold.
    AtLeast(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub feature: usize,
    pub test: SplitTest,
}

impl Split {
    pub fn passes(&self, row: &FeatureVector) -> bool {
        match self.test {
            SplitTest::Present => row.get(self.feature).is_some(),
            SplitTest::AtLeast(t) => row.get(self.feature).unwrap_or(0.0) >= t,
        }
    }
}

/// Sequential scan state shared by every candidate: a candidate replaces
/// the incumbent only if it improves on it by more than [`GAIN_TOLERANCE`].
struct Best {
    found: Option<(Split, f64)>,
}

impl Best {
    fn offer(&mut self, split: Split, decrease: f64) {
        let better = match &self.found {
            None => decrease > GAIN_TOLERANCE,
            Some((_, d)) => decrease > d + GAIN_TOLERANCE,
        };
        if better {
            self.found = Some((split, decrease));
        }
    }
}

/// Weighted impurity decrease of splitting `parent` into `pass` and the rest.
/// `None` if either side is smaller than `min_leaf` (or empty).
fn decrease(
    parent: &[usize],
    pass: &[usize],
    criterion: Criterion,
    min_leaf: usize,
) -> Option<f64> {
    let n: usize = parent.iter().sum();
    let n_pass: usize = pass.iter().sum();
    let n_fail = n - n_pass;
    if n_pass < min_leaf.max(1) || n_fail < min_leaf.max(1) {
        return None;
    }
    let fail: Vec<usize> = parent.iter().zip(pass).map(|(p, q)| p - q).collect();
    let total = n as f64;
    Some(
        impurity_of(parent, n, criterion)
            - (n_fail as f64 / total) * impurity_of(&fail, n_fail, criterion)
            - (n_pass as f64 / total) * impurity_of(pass, n_pass, criterion),
    )
}

fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid > lo {
        mid
    } else {
        hi
    }
}

/// Finds the split of `rows` with the largest impurity decrease.
///
/// Binary features are tested for presence; numeric features at midpoints
/// between consecutive distinct values (absent counts as 0). Candidates are
/// scanned by feature id, then threshold, so ties go to the lowest of both.
/// Returns `None` when no split decreases impurity or every candidate
/// leaves fewer than `min_leaf` rows on a side.
pub fn best_split(
    samples: &Samples<'_>,
    rows: &[usize],
    criterion: Criterion,
    min_leaf: usize,
) -> Option<(Split, f64)> {
    if rows.is_empty() {
        return None;
    }
    let n_labels = samples.n_labels();
    let mut parent = vec![0usize; n_labels];
    for &r in rows {
        parent[samples.labels[r]] += 1;
    }
    if impurity_of(&parent, rows.len(), criterion) <= 0.0 {
        return None;
    }

    let mut binary: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut numeric: BTreeMap<usize, Vec<(f64, usize)>> = BTreeMap::new();
    for &r in rows {
        let label = samples.labels[r];
        for &(f, v) in samples.rows[r].entries() {
            match samples.kinds[f] {
                FeatureKind::Binary => {
                    binary.entry(f).or_insert_with(|| vec![0; n_labels])[label] += 1;
                }
                FeatureKind::Numeric => numeric.entry(f).or_default().push((v, label)),
            }
        }
    }

    let mut best = Best { found: None };
    let mut b = binary.into_iter().peekable();
    let mut m = numeric.into_iter().peekable();
    loop {
        let take_binary = match (b.peek(), m.peek()) {
            (Some((fb, _)), Some((fm, _))) => fb < fm,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => break,
        };
        if take_binary {
            let (feature, pass) = b.next().expect("peeked");
            if let Some(d) = decrease(&parent, &pass, criterion, min_leaf) {
                best.offer(
                    Split {
                        feature,
                        test: SplitTest::Present,
                    },
                    d,
                );
            }
        } else {
            let (feature, values) = m.next().expect("peeked");
            scan_numeric(feature, values, &parent, criterion, min_leaf, &mut best);
        }
    }
    best.found
}

fn scan_numeric(
    feature: usize,
    mut values: Vec<(f64, usize)>,
    parent: &[usize],
    criterion: Criterion,
    min_leaf: usize,
    best: &mut Best,
) {
    let n_labels = parent.len();
    // Rows without the feature sit at value 0.
    let mut zeros = parent.to_vec();
    for &(_, l) in &values {
        zeros[l] -= 1;
    }
    for (v, _) in values.iter_mut() {
        // -0.0 and 0.0 are the same value
        *v += 0.0;
    }
    values.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
    for (v, l) in values {
        match groups.last_mut() {
            Some((gv, counts)) if *gv == v => counts[l] += 1,
            _ => {
                let mut counts = vec![0; n_labels];
                counts[l] += 1;
                groups.push((v, counts));
            }
        }
    }
    if zeros.iter().any(|&c| c > 0) {
        match groups.binary_search_by(|(v, _)| v.total_cmp(&0.0)) {
            Ok(i) => {
                for (g, z) in groups[i].1.iter_mut().zip(&zeros) {
                    *g += z;
                }
            }
            Err(i) => groups.insert(i, (0.0, zeros)),
        }
    }

    // Sweep upward; `pass` holds everything at or above the next threshold.
    let mut pass = parent.to_vec();
    for w in 0..groups.len().saturating_sub(1) {
        for (p, c) in pass.iter_mut().zip(&groups[w].1) {
            *p -= c;
        }
        let threshold = midpoint(groups[w].0, groups[w + 1].0);
        if let Some(d) = decrease(parent, &pass, criterion, min_leaf) {
            best.offer(
                Split {
                    feature,
                    test: SplitTest::AtLeast(threshold),
                },
                d,
            );
        }
    }
}
