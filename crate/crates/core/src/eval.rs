//! Automated scores for a trained model: accuracy against the
//! most-frequent-label baseline, entropy of significant word-order
//! predictions, agreement-rule match (ARM) and cross-treebank accuracy.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dtree::{DecisionTree, TrainParams};
use crate::featurize::{FeatureSpace, FeatureVector, Featurizer};
use crate::taskgen::{Dataset, Task, AGREE};
use crate::treebank::Corpus;

pub const DEFAULT_TAU: f64 = 0.9;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("empty test set")]
    EmptyTestSet,
    #[error("{metric} is not defined for the {task} task")]
    WrongTask { metric: &'static str, task: Task },
    #[error("{rows} feature rows for {instances} instances")]
    LengthMismatch { rows: usize, instances: usize },
}

/// Most frequent training label; ties go to the lexicographically
/// smallest label.
pub fn frequency_baseline(train: &Dataset) -> Result<String, EvalError> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for inst in &train.instances {
        *counts.entry(inst.label.as_str()).or_default() += 1;
    }
    let mut best: Option<(&str, usize)> = None;
    for (label, c) in counts {
        if best.is_none_or(|(_, b)| c > b) {
            best = Some((label, c));
        }
    }
    best.map(|(l, _)| l.to_string())
        .ok_or(EvalError::EmptyTrainingSet)
}

pub fn baseline_accuracy(label: &str, test: &Dataset) -> Result<f64, EvalError> {
    if test.is_empty() {
        return Err(EvalError::EmptyTestSet);
    }
    let hits = test.instances.iter().filter(|i| i.label == label).count();
    Ok(hits as f64 / test.len() as f64)
}

fn check_rows(rows: &[FeatureVector], test: &Dataset) -> Result<(), EvalError> {
    if test.is_empty() {
        return Err(EvalError::EmptyTestSet);
    }
    if rows.len() != test.len() {
        return Err(EvalError::LengthMismatch {
            rows: rows.len(),
            instances: test.len(),
        });
    }
    Ok(())
}

/// Fraction of test instances whose majority-leaf prediction matches the
/// gold label. Significance verdicts play no part here.
pub fn accuracy(
    tree: &DecisionTree,
    rows: &[FeatureVector],
    test: &Dataset,
) -> Result<f64, EvalError> {
    check_rows(rows, test)?;
    let hits = rows
        .iter()
        .zip(&test.instances)
        .filter(|(row, inst)| tree.label_order[tree.predict(row).label] == inst.label)
        .count();
    Ok(hits as f64 / test.len() as f64)
}

/// Entropy (bits) of the significant word-order predictions on the test
/// set. Cannot-decide predictions count towards n but towards no label.
pub fn prediction_entropy(
    tree: &DecisionTree,
    rows: &[FeatureVector],
    test: &Dataset,
) -> Result<f64, EvalError> {
    if test.task != Task::WordOrder {
        return Err(EvalError::WrongTask {
            metric: "prediction entropy",
            task: test.task,
        });
    }
    check_rows(rows, test)?;
    let mut per_label = vec![0usize; tree.label_order.len()];
    for row in rows {
        let leaf = tree.leaf_of(row);
        if let Some(l) = tree.nodes[leaf].verdict().and_then(|v| v.label) {
            per_label[l] += 1;
        }
    }
    let n = rows.len() as f64;
    Ok(per_label
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum())
}

/// Agreement-rule match: the share of test instances whose leaf verdict
/// (required iff labelled agree) matches the leaf's training agree
/// fraction thresholded at `tau`.
pub fn arm(
    tree: &DecisionTree,
    rows: &[FeatureVector],
    test: &Dataset,
    tau: f64,
) -> Result<f64, EvalError> {
    if test.task != Task::Agreement {
        return Err(EvalError::WrongTask {
            metric: "ARM",
            task: test.task,
        });
    }
    check_rows(rows, test)?;
    let agree = tree.label_order.iter().position(|l| l == AGREE);
    let hits = rows
        .iter()
        .filter(|row| {
            let node = &tree.nodes[tree.leaf_of(row)];
            let total = node.total();
            let agree_count = agree.map_or(0, |a| node.counts[a]);
            let required = total > 0 && agree_count as f64 / total as f64 >= tau;
            let predicted = agree.is_some() && node.verdict().and_then(|v| v.label) == agree;
            required == predicted
        })
        .count();
    Ok(hits as f64 / rows.len() as f64)
}

/// Accuracy of a model on other treebanks' test sets, vectorized in the
/// model's own feature space. Targets without instances give `None`.
pub fn cross_eval(
    tree: &DecisionTree,
    space: &FeatureSpace,
    featurizer: &Featurizer<'_>,
    targets: &[(&Dataset, &Corpus)],
) -> Vec<Option<f64>> {
    targets
        .iter()
        .map(|(ds, corpus)| {
            let rows = featurizer.transform(space, ds, corpus);
            accuracy(tree, &rows, ds).ok()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: Task,
    pub task_key: String,
    pub model_accuracy: f64,
    pub baseline_label: String,
    pub baseline_accuracy: f64,
    pub gain: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entropy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arm: Option<f64>,
    pub n_test: usize,
    pub params: TrainParams,
}

/// Scores a labelled tree on the test split.
pub fn evaluate(
    tree: &DecisionTree,
    train: &Dataset,
    test: &Dataset,
    test_rows: &[FeatureVector],
    tau: f64,
) -> Result<EvalReport, EvalError> {
    let baseline_label = frequency_baseline(train)?;
    let baseline_accuracy = baseline_accuracy(&baseline_label, test)?;
    let model_accuracy = accuracy(tree, test_rows, test)?;
    let entropy = match test.task {
        Task::WordOrder => Some(prediction_entropy(tree, test_rows, test)?),
        _ => None,
    };
    let arm = match test.task {
        Task::Agreement => Some(arm(tree, test_rows, test, tau)?),
        _ => None,
    };
    Ok(EvalReport {
        task: test.task,
        task_key: test.task_key.clone(),
        model_accuracy,
        baseline_label,
        baseline_accuracy,
        gain: model_accuracy - baseline_accuracy,
        entropy,
        arm,
        n_test: test.len(),
        params: tree.params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dtree::{Node, NodeKind, Verdict};
    use crate::taskgen::TaskInstance;

    fn dataset(task: Task, labels: &[&str]) -> Dataset {
        let mut names: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        names.sort();
        names.dedup();
        Dataset {
            task,
            task_key: "k".into(),
            labels: names,
            instances: labels
                .iter()
                .map(|l| TaskInstance {
                    sentence: 0,
                    focus_a: 1,
                    focus_b: Some(2),
                    label: l.to_string(),
                })
                .collect(),
        }
    }

    fn leaf(counts: Vec<usize>, label: Option<usize>, order: &[&str]) -> DecisionTree {
        DecisionTree {
            nodes: vec![Node {
                counts,
                depth: 0,
                kind: NodeKind::Leaf {
                    verdict: Some(Verdict {
                        p_value: 0.0,
                        label,
                    }),
                },
            }],
            label_order: order.iter().map(|s| s.to_string()).collect(),
            params: TrainParams::baseline(),
        }
    }

    #[test]
    fn baseline_majority_and_tie() {
        let mut labels = vec!["before"; 7];
        labels.extend(["after"; 3]);
        assert_eq!(
            frequency_baseline(&dataset(Task::WordOrder, &labels)).unwrap(),
            "before"
        );
        let tie: Vec<&str> = ["after", "before"]
            .iter()
            .cycle()
            .take(10)
            .copied()
            .collect();
        assert_eq!(
            frequency_baseline(&dataset(Task::WordOrder, &tie)).unwrap(),
            "after"
        );
        assert_eq!(
            frequency_baseline(&dataset(Task::WordOrder, &[])),
            Err(EvalError::EmptyTrainingSet)
        );
    }

    #[test]
    fn accuracy_ignores_verdicts() {
        let test = dataset(Task::WordOrder, &["before", "before", "after"]);
        let rows = vec![FeatureVector::default(); 3];
        let tree = leaf(vec![1, 5], None, &["after", "before"]);
        let acc = accuracy(&tree, &rows, &test).unwrap();
        assert!((acc - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(
            accuracy(&tree, &[], &dataset(Task::WordOrder, &[])),
            Err(EvalError::EmptyTestSet)
        );
    }

    #[test]
    fn entropy_cases() {
        let order = ["after", "before"];
        let rows = vec![FeatureVector::default(); 4];
        let test = dataset(Task::WordOrder, &["before"; 4]);
        assert_eq!(
            prediction_entropy(&leaf(vec![0, 9], Some(1), &order), &rows, &test).unwrap(),
            0.0
        );
        assert_eq!(
            prediction_entropy(&leaf(vec![4, 5], None, &order), &rows, &test).unwrap(),
            0.0
        );
        let case = dataset(Task::Case, &["Nom"; 4]);
        assert!(prediction_entropy(&leaf(vec![4], None, &["Nom"]), &rows, &case).is_err());
    }

    #[test]
    fn arm_cases() {
        let order = ["agree", "disagree"];
        let rows = vec![FeatureVector::default(); 2];
        let test = dataset(Task::Agreement, &["agree", "agree"]);
        assert_eq!(
            arm(&leaf(vec![50, 0], Some(0), &order), &rows, &test, 0.9).unwrap(),
            1.0
        );
        // agree fraction 0.5: not required; a cannot-decide verdict matches
        assert_eq!(
            arm(&leaf(vec![5, 5], None, &order), &rows, &test, 0.9).unwrap(),
            1.0
        );
        assert_eq!(
            arm(&leaf(vec![5, 5], Some(0), &order), &rows, &test, 0.9).unwrap(),
            0.0
        );
        let wo = dataset(Task::WordOrder, &["before", "before"]);
        assert!(arm(&leaf(vec![5, 5], None, &order), &rows, &wo, 0.9).is_err());
        let empty = dataset(Task::Agreement, &[]);
        assert_eq!(
            arm(&leaf(vec![5, 5], None, &order), &[], &empty, 0.9),
            Err(EvalError::EmptyTestSet)
        );
    }

    #[test]
    fn entropy_with_cannot_decide() {
        use crate::dtree::{Split, SplitTest};
        let node = |kind| Node {
            counts: vec![1, 1],
            depth: 0,
            kind,
        };
        let internal = |feature, fail, pass| {
            node(NodeKind::Internal {
                split: Split {
                    feature,
                    test: SplitTest::Present,
                },
                fail,
                pass,
            })
        };
        let verdict = |label| {
            node(NodeKind::Leaf {
                verdict: Some(Verdict {
                    p_value: 0.0,
                    label,
                }),
            })
        };
        let tree = DecisionTree {
            nodes: vec![
                internal(0, 1, 4),
                internal(1, 2, 3),
                verdict(None),
                verdict(Some(0)),
                verdict(Some(1)),
            ],
            label_order: vec!["after".into(), "before".into()],
            params: TrainParams::baseline(),
        };
        let mut rows = vec![FeatureVector::new(vec![(0, 1.0)]); 40];
        rows.extend(vec![FeatureVector::new(vec![(1, 1.0)]); 40]);
        rows.extend(vec![FeatureVector::default(); 20]);
        let test = dataset(Task::WordOrder, &["before"; 100]);
        let h = prediction_entropy(&tree, &rows, &test).unwrap();
        let oracle = -2.0 * 0.4 * f64::log2(0.4);
        assert!((h - oracle).abs() < 1e-12);
        assert!((h - 1.0575).abs() < 1e-4);
        rows.truncate(80);
        let test = dataset(Task::WordOrder, &["before"; 80]);
        assert!((prediction_entropy(&tree, &rows, &test).unwrap() - 1.0).abs() < 1e-15);
    }
}
