//! Rule reports in JSON, Markdown and self-contained HTML, plus the tree
//! document used to reload a trained model.
//!
//! Every emitter is a pure function of its inputs: the same rules,
//! evaluation and metadata always give the same bytes.

mod html;
mod markdown;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dtree::{DecisionTree, TrainParams};
use crate::eval::EvalReport;
use crate::featurize::{FeatureKind, FeatureSpace, NamedFeature};
use crate::ruleset::Rule;
use crate::taskgen::Task;

pub use html::emit_html;
pub use markdown::emit_markdown;

pub const SCHEMA_VERSION: u32 = 1;
pub const NO_SIGNIFICANT_RULES: &str = "no significant rules";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema version {0}")]
    Schema(u32),
    #[error("tree refers to feature {0}, beyond the {1} listed features")]
    FeatureOutOfRange(usize, usize),
}

/// Describes the run that produced a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool: String,
    pub version: String,
    pub treebank_id: String,
    pub language: String,
    pub task: Task,
    pub task_key: String,
    pub features: String,
    pub seed: u64,
    pub alpha: f64,
    pub tau: f64,
    pub params: TrainParams,
    pub n_train: usize,
    pub n_valid: usize,
    pub n_test: usize,
}

impl RunMetadata {
    pub fn title(&self) -> String {
        let tb = if self.treebank_id.is_empty() {
            String::new()
        } else {
            format!(" ({})", self.treebank_id)
        };
        format!("{} rules: {}{tb}", self.task, self.task_key)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RulesDocument {
    pub schema_version: u32,
    pub metadata: RunMetadata,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub eval: Option<EvalReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub notice: Option<String>,
    /// Significant rules.
    pub rules: Vec<Rule>,
    /// Cannot-decide rules.
    pub uncertain: Vec<Rule>,
}

impl RulesDocument {
    pub fn new(rules: &[Rule], eval: Option<&EvalReport>, metadata: &RunMetadata) -> Self {
        let (significant, uncertain): (Vec<Rule>, Vec<Rule>) =
            rules.iter().cloned().partition(Rule::is_significant);
        RulesDocument {
            schema_version: SCHEMA_VERSION,
            metadata: metadata.clone(),
            eval: eval.cloned(),
            notice: significant
                .is_empty()
                .then(|| NO_SIGNIFICANT_RULES.to_string()),
            rules: significant,
            uncertain,
        }
    }

    /// All rules back in leaf order.
    pub fn into_rules(self) -> Vec<Rule> {
        let mut all: Vec<Rule> = self.rules.into_iter().chain(self.uncertain).collect();
        all.sort_by_key(|r| r.leaf);
        all
    }
}

pub fn emit_json(rules: &[Rule], eval: Option<&EvalReport>, metadata: &RunMetadata) -> Vec<u8> {
    let doc = RulesDocument::new(rules, eval, metadata);
    let mut out = serde_json::to_vec_pretty(&doc).expect("rules serialize");
    out.push(b'\n');
    out
}

pub fn parse_rules_json(bytes: &[u8]) -> Result<RulesDocument, ReportError> {
    let doc: RulesDocument = serde_json::from_slice(bytes)?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(ReportError::Schema(doc.schema_version));
    }
    Ok(doc)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureEntry {
    pub name: String,
    pub kind: FeatureKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub display: Option<String>,
}

/// A trained tree with the feature space its splits index into.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeDocument {
    pub schema_version: u32,
    pub metadata: RunMetadata,
    pub features: Vec<FeatureEntry>,
    pub tree: DecisionTree,
}

pub fn emit_tree_json(
    tree: &DecisionTree,
    space: &FeatureSpace,
    metadata: &RunMetadata,
) -> Vec<u8> {
    let features = (0..space.len())
        .map(|id| FeatureEntry {
            name: space.name(id).to_string(),
            kind: space.kind(id),
            display: (space.display(id) != space.name(id)).then(|| space.display(id).to_string()),
        })
        .collect();
    let doc = TreeDocument {
        schema_version: SCHEMA_VERSION,
        metadata: metadata.clone(),
        features,
        tree: tree.clone(),
    };
    let mut out = serde_json::to_vec_pretty(&doc).expect("tree serializes");
    out.push(b'\n');
    out
}

/// Reloads a tree document and rebuilds its feature space.
pub fn load_tree_json(bytes: &[u8]) -> Result<(TreeDocument, FeatureSpace), ReportError> {
    let doc: TreeDocument = serde_json::from_slice(bytes)?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(ReportError::Schema(doc.schema_version));
    }
    let named: Vec<NamedFeature> = doc
        .features
        .iter()
        .map(|f| NamedFeature {
            name: f.name.clone(),
            kind: f.kind,
            value: 1.0,
            display: f.display.clone(),
        })
        .collect();
    let space = FeatureSpace::from_features(&named);
    // Ids follow sorted names, so a listed order that was not sorted would
    // silently remap the splits.
    for (id, f) in doc.features.iter().enumerate() {
        if space.id(&f.name) != Some(id) {
            return Err(ReportError::FeatureOutOfRange(id, space.len()));
        }
    }
    for node in &doc.tree.nodes {
        if let crate::dtree::NodeKind::Internal { split, .. } = &node.kind {
            if split.feature >= space.len() {
                return Err(ReportError::FeatureOutOfRange(split.feature, space.len()));
            }
        }
    }
    Ok((doc, space))
}

pub(crate) fn format_p(p: f64) -> String {
    if p == 0.0 {
        "0".into()
    } else if p < 1e-4 {
        format!("{p:.3e}")
    } else {
        format!("{p:.4}")
    }
}

pub(crate) fn support_text(rule: &Rule) -> String {
    rule.support
        .iter()
        .map(|s| format!("{} {}", s.label, s.count))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Marks a focus token: the first focus id is the dependent, the second
/// the head.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Mark {
    Dep,
    Head,
    Plain,
}

pub(crate) fn marks(example: &crate::ruleset::Example) -> impl Iterator<Item = (&str, Mark)> {
    example.tokens.iter().enumerate().map(move |(i, form)| {
        let id = i + 1;
        let mark = match example.focus.iter().position(|&f| f == id) {
            Some(0) => Mark::Dep,
            Some(_) => Mark::Head,
            None => Mark::Plain,
        };
        (form.as_str(), mark)
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::dtree::Criterion;
    use crate::ruleset::{Condition, ConditionTest, Example, LabelCount, RuleLabel};

    pub(crate) fn metadata() -> RunMetadata {
        RunMetadata {
            tool: "lexrules".into(),
            version: "0.1.0".into(),
            treebank_id: "synth".into(),
            language: "synth".into(),
            task: Task::WordOrder,
            task_key: "adjective-noun".into(),
            features: "syn".into(),
            seed: 7,
            alpha: 0.01,
            tau: 0.9,
            params: TrainParams::new(Criterion::Gini, 3),
            n_train: 10,
            n_valid: 2,
            n_test: 2,
        }
    }

    pub(crate) fn rules() -> Vec<Rule> {
        let example = Example {
            sentence: 3,
            focus: vec![2, 3],
            label: "before".into(),
            tokens: vec!["la".into(), "primera".into(), "casa<&>".into()],
            text: "la primera casa<&>".into(),
        };
        vec![
            Rule {
                leaf: 1,
                conditions: vec![Condition {
                    feature: "dep-numtype-is-ord".into(),
                    display: "dep-numtype-is-ord".into(),
                    test: ConditionTest::Absent,
                }],
                label: RuleLabel::CannotDecide,
                majority: "after".into(),
                p_value: 0.5,
                support: vec![
                    LabelCount {
                        label: "after".into(),
                        count: 3,
                    },
                    LabelCount {
                        label: "before".into(),
                        count: 2,
                    },
                ],
                positives: vec![],
                negatives: vec![],
            },
            Rule {
                leaf: 2,
                conditions: vec![Condition {
                    feature: "dep-numtype-is-ord".into(),
                    display: "dep-numtype-is-ord".into(),
                    test: ConditionTest::Present,
                }],
                label: RuleLabel::Predicts("before".into()),
                majority: "before".into(),
                p_value: 1.2345e-14,
                support: vec![
                    LabelCount {
                        label: "after".into(),
                        count: 0,
                    },
                    LabelCount {
                        label: "before".into(),
                        count: 60,
                    },
                ],
                positives: vec![example],
                negatives: vec![],
            },
        ]
    }

    #[test]
    fn json_round_trip() {
        let rs = rules();
        let bytes = emit_json(&rs, None, &metadata());
        let doc = parse_rules_json(&bytes).unwrap();
        assert_eq!(doc.rules.len(), 1);
        assert_eq!(doc.uncertain.len(), 1);
        assert_eq!(doc.notice, None);
        assert_eq!(doc.into_rules(), rs);
        assert_eq!(bytes, emit_json(&rs, None, &metadata()));
    }

    #[test]
    fn json_notice_without_significant_rules() {
        let rs = vec![rules().remove(0)];
        let doc = parse_rules_json(&emit_json(&rs, None, &metadata())).unwrap();
        assert!(doc.rules.is_empty());
        assert_eq!(doc.notice.as_deref(), Some(NO_SIGNIFICANT_RULES));
    }

    #[test]
    fn tree_round_trip() {
        use crate::dtree::{grow, Samples};
        use crate::featurize::FeatureVector;
        let feats = vec![
            NamedFeature::binary("a".into()),
            NamedFeature {
                name: "b-dim1".into(),
                kind: FeatureKind::Numeric,
                value: 0.5,
                display: Some("b-word-is-like={x}".into()),
            },
        ];
        let space = FeatureSpace::from_features(&feats);
        let rows = vec![
            FeatureVector::new(vec![(1, 0.7)]),
            FeatureVector::new(vec![(1, 0.2)]),
            FeatureVector::new(vec![(0, 1.0)]),
        ];
        let labels = vec![0, 1, 1];
        let kinds = space.kinds().to_vec();
        let ln = vec!["after".to_string(), "before".to_string()];
        let s = Samples {
            rows: &rows,
            labels: &labels,
            kinds: &kinds,
            label_names: &ln,
        };
        let tree = grow(&s, &TrainParams::new(Criterion::Entropy, 4)).unwrap();
        let bytes = emit_tree_json(&tree, &space, &metadata());
        let (doc, back) = load_tree_json(&bytes).unwrap();
        assert_eq!(doc.tree, tree);
        assert_eq!(back, space);
        assert_eq!(back.display(1), "b-word-is-like={x}");
    }
}
