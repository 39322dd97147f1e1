//! Leaf significance testing and rule extraction.
//!
//! Each leaf's label histogram is compared with a task-specific null
//! distribution by a chi-squared goodness-of-fit test. Leaves that differ
//! at level `alpha` take their majority label; the rest are
//! cannot-decide. Every leaf then becomes a [`Rule`] whose conditions are
//! the split tests on its root-to-leaf path.

mod chi2;
mod examples;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dtree::{DecisionTree, NodeKind, SplitTest, Verdict};
use crate::featurize::{FeatureSpace, FeatureVector};
use crate::taskgen::{Dataset, Task, TaskInstance, AGREE, DISAGREE};
use crate::treebank::Corpus;

pub use chi2::{chi2_sf, chi2_statistic, gamma_q, ln_gamma};
pub use examples::{select_examples, Example};

pub const DEFAULT_ALPHA: f64 = 0.01;
pub const DEFAULT_EXAMPLES_PER_RULE: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum RuleError {
    #[error("empty training dataset")]
    EmptyDataset,
}

/// Expected label proportions under the null hypothesis, aligned with the
/// dataset's label order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullDistribution {
    pub probs: Vec<f64>,
}

impl NullDistribution {
    pub fn uniform(n: usize) -> Self {
        NullDistribution {
            probs: vec![1.0 / n as f64; n],
        }
    }
}

/// p-value of a leaf histogram against `null`; 1 for an empty leaf or
/// when fewer than two labels have positive expectation.
pub fn chi2_pvalue(observed: &[usize], null: &NullDistribution) -> f64 {
    if observed.iter().sum::<usize>() == 0 {
        return 1.0;
    }
    let (stat, df) = chi2_statistic(observed, &null.probs);
    chi2_sf(stat, df)
}

/// Chance agreement: the probability that two values drawn independently
/// from the pooled attribute marginal of both pair members coincide.
fn chance_agreement(dataset: &Dataset, corpus: &Corpus) -> f64 {
    let mut marginal: BTreeMap<&str, usize> = BTreeMap::new();
    for inst in &dataset.instances {
        let sentence = &corpus.sentences[inst.sentence];
        for id in inst.focus_ids() {
            if let Some(v) = sentence
                .token(id)
                .and_then(|t| t.feature(&dataset.task_key))
            {
                *marginal.entry(v).or_default() += 1;
            }
        }
    }
    let total: usize = marginal.values().sum();
    if total == 0 {
        return 0.0;
    }
    marginal
        .values()
        .map(|&c| {
            let q = c as f64 / total as f64;
            q * q
        })
        .sum()
}

/// Null hypothesis for leaves of a model trained on `dataset`: uniform
/// over labels for word order and case, chance agreement for agreement.
pub fn null_distribution(
    dataset: &Dataset,
    corpus: &Corpus,
) -> Result<NullDistribution, RuleError> {
    if dataset.is_empty() {
        return Err(RuleError::EmptyDataset);
    }
    match dataset.task {
        Task::WordOrder | Task::Case => Ok(NullDistribution::uniform(dataset.labels.len())),
        Task::Agreement => {
            let p = chance_agreement(dataset, corpus);
            let probs = dataset
                .labels
                .iter()
                .map(|l| match l.as_str() {
                    AGREE => p,
                    DISAGREE => 1.0 - p,
                    _ => 0.0,
                })
                .collect();
            Ok(NullDistribution { probs })
        }
    }
}

/// Attaches a verdict to every leaf: the majority label if the leaf's
/// p-value is below `alpha`, cannot-decide otherwise.
pub fn label_leaves(mut tree: DecisionTree, null: &NullDistribution, alpha: f64) -> DecisionTree {
    for node in &mut tree.nodes {
        let majority = node.majority();
        let empty = node.total() == 0;
        if let NodeKind::Leaf { verdict } = &mut node.kind {
            let p_value = chi2_pvalue(&node.counts, null);
            let label = (!empty && p_value < alpha).then_some(majority);
            *verdict = Some(Verdict { p_value, label });
        }
    }
    tree
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditionTest {
    Present,
    Absent,
    AtLeast(f64),
    Below(f64),
}

/// One split test on a rule's path, stated over a feature name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub feature: String,
    pub display: String,
    pub test: ConditionTest,
}

impl Condition {
    pub fn holds(&self, space: &FeatureSpace, row: &FeatureVector) -> bool {
        let value = space.id(&self.feature).and_then(|id| row.get(id));
        match self.test {
            ConditionTest::Present => value.is_some(),
            ConditionTest::Absent => value.is_none(),
            ConditionTest::AtLeast(t) => value.unwrap_or(0.0) >= t,
            ConditionTest::Below(t) => value.unwrap_or(0.0) < t,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.test {
            ConditionTest::Present => write!(f, "{}", self.display),
            ConditionTest::Absent => write!(f, "NOT ({})", self.display),
            ConditionTest::AtLeast(t) => write!(f, "{} ≥ {t:.4}", self.display),
            ConditionTest::Below(t) => write!(f, "{} < {t:.4}", self.display),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleLabel {
    Predicts(String),
    CannotDecide,
}

impl RuleLabel {
    pub fn predicted(&self) -> Option<&str> {
        match self {
            RuleLabel::Predicts(l) => Some(l),
            RuleLabel::CannotDecide => None,
        }
    }
}

impl fmt::Display for RuleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleLabel::Predicts(l) => f.write_str(l),
            RuleLabel::CannotDecide => f.write_str("cannot decide"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCount {
    pub label: String,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub leaf: usize,
    pub conditions: Vec<Condition>,
    pub label: RuleLabel,
    /// Majority training label at the leaf, whatever the verdict.
    pub majority: String,
    pub p_value: f64,
    pub support: Vec<LabelCount>,
    pub positives: Vec<Example>,
    pub negatives: Vec<Example>,
}

impl Rule {
    pub fn is_significant(&self) -> bool {
        matches!(self.label, RuleLabel::Predicts(_))
    }

    /// Label that positive examples must carry.
    pub fn example_label(&self) -> &str {
        self.label.predicted().unwrap_or(&self.majority)
    }

    pub fn holds(&self, space: &FeatureSpace, row: &FeatureVector) -> bool {
        self.conditions.iter().all(|c| c.holds(space, row))
    }

    pub fn describe(&self) -> String {
        if self.conditions.is_empty() {
            return "(all instances)".into();
        }
        self.conditions
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(" AND ")
    }
}

/// One rule per leaf, in preorder, with empty example lists. Leaves
/// without a verdict are reported as cannot-decide with p = 1.
pub fn extract_rules(tree: &DecisionTree, space: &FeatureSpace) -> Vec<Rule> {
    tree.leaves()
        .map(|(leaf, node)| {
            let conditions = tree
                .path_to(leaf)
                .into_iter()
                .map(|(at, passed)| {
                    let NodeKind::Internal { split, .. } = &tree.nodes[at].kind else {
                        unreachable!("paths only pass through internal nodes")
                    };
                    let test = match (split.test, passed) {
                        (SplitTest::Present, true) => ConditionTest::Present,
                        (SplitTest::Present, false) => ConditionTest::Absent,
                        (SplitTest::AtLeast(t), true) => ConditionTest::AtLeast(t),
                        (SplitTest::AtLeast(t), false) => ConditionTest::Below(t),
                    };
                    Condition {
                        feature: space.name(split.feature).to_string(),
                        display: space.display(split.feature).to_string(),
                        test,
                    }
                })
                .collect();
            let verdict = node.verdict().unwrap_or(Verdict {
                p_value: 1.0,
                label: None,
            });
            Rule {
                leaf,
                conditions,
                label: match verdict.label {
                    Some(l) => RuleLabel::Predicts(tree.label_order[l].clone()),
                    None => RuleLabel::CannotDecide,
                },
                majority: tree.label_order[node.majority()].clone(),
                p_value: verdict.p_value,
                support: tree
                    .label_order
                    .iter()
                    .zip(&node.counts)
                    .map(|(label, &count)| LabelCount {
                        label: label.clone(),
                        count,
                    })
                    .collect(),
                positives: Vec::new(),
                negatives: Vec::new(),
            }
        })
        .collect()
}

/// Extracts rules and attaches examples drawn from the training instances
/// routed to each leaf.
#[allow(clippy::too_many_arguments)]
pub fn build_rules(
    tree: &DecisionTree,
    space: &FeatureSpace,
    train: &Dataset,
    train_rows: &[FeatureVector],
    corpus: &Corpus,
    seed: u64,
    per_rule: usize,
) -> Vec<Rule> {
    let mut by_leaf: BTreeMap<usize, Vec<&TaskInstance>> = BTreeMap::new();
    for (inst, row) in train.instances.iter().zip(train_rows) {
        by_leaf.entry(tree.leaf_of(row)).or_default().push(inst);
    }
    let mut rules = extract_rules(tree, space);
    for rule in &mut rules {
        let routed = by_leaf.get(&rule.leaf).map(Vec::as_slice).unwrap_or(&[]);
        let (pos, neg) = select_examples(rule, routed, corpus, seed, per_rule);
        rule.positives = pos;
        rule.negatives = neg;
    }
    rules
}
