//! Turns a parsed corpus into labelled classification datasets for word
//! order, case marking and agreement.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::treebank::{Corpus, Sentence, Token};

pub const BEFORE: &str = "before";
pub const AFTER: &str = "after";
pub const AGREE: &str = "agree";
pub const DISAGREE: &str = "disagree";

/// Attributes supported by the agreement task.
pub const AGREEMENT_ATTRIBUTES: [&str; 3] = ["Gender", "Person", "Number"];

#[derive(Debug, Error, PartialEq)]
pub enum TaskError {
    #[error("unsupported agreement attribute {0:?} (expected Gender, Person or Number)")]
    UnsupportedAttribute(String),
    #[error("unknown word-order relation {0:?}")]
    UnknownRelation(String),
    #[error("invalid relation {name:?}: {reason}")]
    InvalidRelation { name: String, reason: String },
    #[error("duplicate relation name {0:?}")]
    DuplicateRelation(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    WordOrder,
    Case,
    Agreement,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::WordOrder => "word-order",
            Task::Case => "case",
            Task::Agreement => "agreement",
        })
    }
}

impl FromStr for Task {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "word-order" | "word_order" => Ok(Task::WordOrder),
            "case" => Ok(Task::Case),
            "agreement" => Ok(Task::Agreement),
            other => Err(format!(
                "unknown task {other:?} (expected word-order, case or agreement)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeprelMatch {
    Any,
    Equals(String),
    Contains(String),
}

impl DeprelMatch {
    pub fn matches(&self, deprel: Option<&str>) -> bool {
        match self {
            DeprelMatch::Any => true,
            DeprelMatch::Equals(s) => deprel == Some(s.as_str()),
            DeprelMatch::Contains(s) => deprel.is_some_and(|d| d.contains(s.as_str())),
        }
    }
}

/// Which member of the pair has to come first for the label `before`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Dependent,
    Head,
}

/// A word-order relation: a (dependent, head) pair selected by POS and
/// dependency label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationSpec {
    pub name: String,
    #[serde(default)]
    pub wals_code: String,
    /// Allowed dependent UPOS tags; empty means any.
    #[serde(default)]
    pub dependent_upos: Vec<String>,
    #[serde(default = "any_deprel")]
    pub deprel: DeprelMatch,
    pub head_upos: Vec<String>,
    #[serde(default = "dependent_orientation")]
    pub orientation: Orientation,
}

fn any_deprel() -> DeprelMatch {
    DeprelMatch::Any
}

fn dependent_orientation() -> Orientation {
    Orientation::Dependent
}

impl RelationSpec {
    pub fn validate(&self) -> Result<(), TaskError> {
        let invalid = |reason: &str| TaskError::InvalidRelation {
            name: self.name.clone(),
            reason: reason.into(),
        };
        if self.name.is_empty() {
            return Err(invalid("empty name"));
        }
        if self.dependent_upos.is_empty() && self.deprel == DeprelMatch::Any {
            return Err(invalid("dependent predicate matches every token"));
        }
        if self.head_upos.is_empty() {
            return Err(invalid("head predicate is empty"));
        }
        Ok(())
    }

    pub fn matches(&self, dependent: &Token, head: &Token) -> bool {
        let dep_ok = self.dependent_upos.is_empty()
            || dependent
                .upos
                .as_deref()
                .is_some_and(|u| self.dependent_upos.iter().any(|x| x == u));
        dep_ok
            && self.deprel.matches(dependent.deprel.as_deref())
            && head
                .upos
                .as_deref()
                .is_some_and(|u| self.head_upos.iter().any(|x| x == u))
    }

    fn rel(name: &str, wals: &str, dep: &[&str], deprel: DeprelMatch, head: &[&str]) -> Self {
        RelationSpec {
            name: name.into(),
            wals_code: wals.into(),
            dependent_upos: dep.iter().map(|s| s.to_string()).collect(),
            deprel,
            head_upos: head.iter().map(|s| s.to_string()).collect(),
            orientation: Orientation::Dependent,
        }
    }
}

/// The five default word-order relations, using SUD labels.
pub fn default_relations() -> Vec<RelationSpec> {
    let mut adposition = RelationSpec::rel(
        "adposition-noun",
        "85A",
        &["NOUN"],
        DeprelMatch::Any,
        &["ADP"],
    );
    adposition.orientation = Orientation::Head;
    vec![
        RelationSpec::rel(
            "subject-verb",
            "82A",
            &[],
            DeprelMatch::Equals("subj".into()),
            &["VERB", "AUX"],
        ),
        RelationSpec::rel(
            "object-verb",
            "83A",
            &[],
            DeprelMatch::Equals("comp:obj".into()),
            &["VERB"],
        ),
        adposition,
        RelationSpec::rel(
            "adjective-noun",
            "87A",
            &["ADJ"],
            DeprelMatch::Contains("mod".into()),
            &["NOUN"],
        ),
        RelationSpec::rel("numeral-noun", "89A", &["NUM"], DeprelMatch::Any, &["NOUN"]),
    ]
}

/// Merges user overrides into the defaults: same name replaces, new names append.
pub fn merge_relations(overrides: &[RelationSpec]) -> Result<Vec<RelationSpec>, TaskError> {
    let mut seen = BTreeSet::new();
    for r in overrides {
        r.validate()?;
        if !seen.insert(r.name.as_str()) {
            return Err(TaskError::DuplicateRelation(r.name.clone()));
        }
    }
    let mut out = default_relations();
    for r in overrides {
        match out.iter_mut().find(|d| d.name == r.name) {
            Some(slot) => *slot = r.clone(),
            None => out.push(r.clone()),
        }
    }
    Ok(out)
}

pub fn find_relation<'a>(
    relations: &'a [RelationSpec],
    name: &str,
) -> Result<&'a RelationSpec, TaskError> {
    relations
        .iter()
        .find(|r| r.name == name)
        .ok_or_else(|| TaskError::UnknownRelation(name.to_string()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskInstance {
    /// Index of the sentence in its corpus.
    pub sentence: usize,
    /// The dependent (word order, agreement) or the case-bearing token.
    pub focus_a: usize,
    /// The head of the pair; absent for case marking.
    pub focus_b: Option<usize>,
    pub label: String,
}

impl TaskInstance {
    pub fn focus_ids(&self) -> Vec<usize> {
        std::iter::once(self.focus_a).chain(self.focus_b).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub task: Task,
    pub task_key: String,
    /// Label set, sorted lexicographically.
    pub labels: Vec<String>,
    pub instances: Vec<TaskInstance>,
}

impl Dataset {
    fn new(task: Task, key: &str, configured: &[&str], instances: Vec<TaskInstance>) -> Self {
        let labels: BTreeSet<String> = configured
            .iter()
            .map(|s| s.to_string())
            .chain(instances.iter().map(|i| i.label.clone()))
            .collect();
        Dataset {
            task,
            task_key: key.to_string(),
            labels: labels.into_iter().collect(),
            instances,
        }
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

fn pairs(sentence: &Sentence) -> impl Iterator<Item = (&Token, &Token)> {
    sentence
        .tokens
        .iter()
        .filter_map(move |t| sentence.token(t.head).map(|h| (t, h)))
}

/// One instance per (dependent, head) pair matching `spec`, labelled by
/// the relative position of the oriented member.
pub fn extract_word_order(corpus: &Corpus, spec: &RelationSpec) -> Dataset {
    let mut instances = Vec::new();
    for (si, sentence) in corpus.sentences.iter().enumerate() {
        for (dep, head) in pairs(sentence) {
            if !spec.matches(dep, head) {
                continue;
            }
            let (first, other) = match spec.orientation {
                Orientation::Dependent => (dep.id, head.id),
                Orientation::Head => (head.id, dep.id),
            };
            instances.push(TaskInstance {
                sentence: si,
                focus_a: dep.id,
                focus_b: Some(head.id),
                label: if first < other { BEFORE } else { AFTER }.to_string(),
            });
        }
    }
    Dataset::new(Task::WordOrder, &spec.name, &[BEFORE, AFTER], instances)
}

/// One instance per token tagged `pos` that carries a `Case` value.
pub fn extract_case(corpus: &Corpus, pos: &str) -> Dataset {
    let mut instances = Vec::new();
    for (si, sentence) in corpus.sentences.iter().enumerate() {
        for tok in &sentence.tokens {
            if tok.upos.as_deref() != Some(pos) {
                continue;
            }
            if let Some(case) = tok.feature("Case") {
                instances.push(TaskInstance {
                    sentence: si,
                    focus_a: tok.id,
                    focus_b: None,
                    label: case.to_string(),
                });
            }
        }
    }
    Dataset::new(Task::Case, pos, &[], instances)
}

/// One instance per dependency edge whose two ends both mark `attribute`.
pub fn extract_agreement(corpus: &Corpus, attribute: &str) -> Result<Dataset, TaskError> {
    if !AGREEMENT_ATTRIBUTES.contains(&attribute) {
        return Err(TaskError::UnsupportedAttribute(attribute.to_string()));
    }
    let mut instances = Vec::new();
    for (si, sentence) in corpus.sentences.iter().enumerate() {
        for (dep, head) in pairs(sentence) {
            let (Some(dv), Some(hv)) = (dep.feature(attribute), head.feature(attribute)) else {
                continue;
            };
            instances.push(TaskInstance {
                sentence: si,
                focus_a: dep.id,
                focus_b: Some(head.id),
                label: if dv == hv { AGREE } else { DISAGREE }.to_string(),
            });
        }
    }
    Ok(Dataset::new(
        Task::Agreement,
        attribute,
        &[AGREE, DISAGREE],
        instances,
    ))
}

/// Builds the dataset for `task`/`key`. For word order `key` names a relation in `relations`.
pub fn extract(
    corpus: &Corpus,
    task: Task,
    key: &str,
    relations: &[RelationSpec],
) -> Result<Dataset, TaskError> {
    match task {
        Task::WordOrder => Ok(extract_word_order(corpus, find_relation(relations, key)?)),
        Task::Case => Ok(extract_case(corpus, key)),
        Task::Agreement => extract_agreement(corpus, key),
    }
}
