//! Syntactic, lexical and semantic features of an instance's focus words.
//!
//! The focus words of an instance are the relation token(s) together with
//! the head of the pair and the nearest dependents of each member. Every
//! feature name is prefixed with the focus role it was read from, e.g.
//! `dep-numtype-is-ord` or `head-lemma-is-libro`.

mod lexicon;
mod space;

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::taskgen::{Dataset, Task, TaskInstance};
use crate::treebank::{Corpus, Sentence, Token};

pub use lexicon::{load_sparse_lexicon, parse_sparse_lexicon, SparseLexicon, DEFAULT_TOP_K};
pub use space::{FeatureKind, FeatureSpace, FeatureVector, NamedFeature};

/// Number of dependents kept per focus token.
pub const MAX_CHILD_ROLES: usize = 3;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("no instances")]
    NoInstances,
    #[error("no feature families selected")]
    NoFeatureFamilies,
    #[error("semantic features require a sparse lexicon")]
    MissingLexicon,
    #[error("lexicon line {line}: {reason}")]
    Lexicon { line: usize, reason: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Dep,
    Head,
    /// Head of the pair's head.
    DepHead,
    DepChild(usize),
    HeadChild(usize),
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Dep => f.write_str("dep"),
            Role::Head => f.write_str("head"),
            Role::DepHead => f.write_str("dep-head"),
            Role::DepChild(i) => write!(f, "dep-child-{i}"),
            Role::HeadChild(i) => write!(f, "head-child-{i}"),
        }
    }
}

/// Focus tokens of one instance, in role order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FocusSet {
    pub roles: Vec<(Role, usize)>,
}

impl FocusSet {
    pub fn get(&self, role: Role) -> Option<usize> {
        self.roles
            .iter()
            .find(|(r, _)| *r == role)
            .map(|(_, id)| *id)
    }
}

/// Up to [`MAX_CHILD_ROLES`] dependents of `id`, nearest first (ties go left).
fn nearest_children(sentence: &Sentence, id: usize, skip: Option<usize>) -> Vec<usize> {
    let mut kids: Vec<usize> = sentence
        .children(id)
        .map(|t| t.id)
        .filter(|&c| Some(c) != skip)
        .collect();
    kids.sort_by_key(|&c| (c.abs_diff(id), c));
    kids.truncate(MAX_CHILD_ROLES);
    kids
}

pub fn collect_focus(sentence: &Sentence, instance: &TaskInstance) -> FocusSet {
    let dep = instance.focus_a;
    let head = instance
        .focus_b
        .or_else(|| sentence.token(dep).map(|t| t.head).filter(|&h| h != 0));
    let mut roles = vec![(Role::Dep, dep)];
    if let Some(h) = head {
        roles.push((Role::Head, h));
        if let Some(hh) = sentence
            .token(h)
            .map(|t| t.head)
            .filter(|&x| x != 0 && x != dep)
        {
            roles.push((Role::DepHead, hh));
        }
    }
    for (i, c) in nearest_children(sentence, dep, head)
        .into_iter()
        .enumerate()
    {
        roles.push((Role::DepChild(i + 1), c));
    }
    if let Some(h) = head {
        for (i, c) in nearest_children(sentence, h, Some(dep))
            .into_iter()
            .enumerate()
        {
            roles.push((Role::HeadChild(i + 1), c));
        }
    }
    FocusSet { roles }
}

fn normalize(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_whitespace() {
                '_'
            } else {
                c.to_ascii_lowercase()
            }
        })
        .collect()
}

/// Morphological attributes hidden from the feature extractor because they
/// carry the label (the case of a case-marking token, the agreeing attribute
/// on both members of an agreement pair).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HiddenAttributes(Vec<(Role, String)>);

impl HiddenAttributes {
    pub fn for_task(task: Task, key: &str) -> Self {
        match task {
            Task::WordOrder => HiddenAttributes::default(),
            Task::Case => HiddenAttributes(vec![(Role::Dep, "Case".into())]),
            Task::Agreement => HiddenAttributes(vec![
                (Role::Dep, key.to_string()),
                (Role::Head, key.to_string()),
            ]),
        }
    }

    fn hides(&self, role: Role, attr: &str) -> bool {
        self.0.iter().any(|(r, a)| *r == role && a == attr)
    }
}

fn tokens<'s>(
    focus: &'s FocusSet,
    sentence: &'s Sentence,
) -> impl Iterator<Item = (Role, &'s Token)> {
    focus
        .roles
        .iter()
        .filter_map(|(r, id)| sentence.token(*id).map(|t| (*r, t)))
}

/// POS, morphology and dependency label of every focus token.
pub fn syntactic_features(
    focus: &FocusSet,
    sentence: &Sentence,
    hidden: &HiddenAttributes,
) -> Vec<NamedFeature> {
    let mut out = Vec::new();
    for (role, tok) in tokens(focus, sentence) {
        if let Some(upos) = &tok.upos {
            out.push(NamedFeature::binary(format!(
                "{role}-is-{}",
                normalize(upos)
            )));
        }
        for (attr, val) in &tok.morph {
            if hidden.hides(role, attr) {
                continue;
            }
            out.push(NamedFeature::binary(format!(
                "{role}-{}-is-{}",
                normalize(attr),
                normalize(val)
            )));
        }
        if let Some(deprel) = &tok.deprel {
            out.push(NamedFeature::binary(format!(
                "{role}-deprel-is-{}",
                normalize(deprel)
            )));
        }
    }
    out
}

pub fn lexical_features(focus: &FocusSet, sentence: &Sentence) -> Vec<NamedFeature> {
    tokens(focus, sentence)
        .filter_map(|(role, tok)| {
            tok.lemma
                .as_ref()
                .map(|l| NamedFeature::binary(format!("{role}-lemma-is-{l}")))
        })
        .collect()
}

fn lexicon_vector<'l>(lexicon: &'l SparseLexicon, tok: &Token) -> Option<&'l [f64]> {
    lexicon
        .vector(&tok.form)
        .or_else(|| lexicon.vector(&tok.form.to_lowercase()))
        .or_else(|| tok.lemma.as_deref().and_then(|l| lexicon.vector(l)))
}

/// One numeric feature per positive, retained lexicon dimension of each focus word.
pub fn semantic_features(
    focus: &FocusSet,
    sentence: &Sentence,
    lexicon: &SparseLexicon,
) -> Vec<NamedFeature> {
    let mut out = Vec::new();
    for (role, tok) in tokens(focus, sentence) {
        let Some(vector) = lexicon_vector(lexicon, tok) else {
            continue;
        };
        for d in lexicon.retained_dims() {
            let value = vector[d];
            if value > 0.0 {
                out.push(NamedFeature {
                    name: format!("{role}-dim{d}"),
                    kind: FeatureKind::Numeric,
                    value,
                    display: Some(format!("{role}-word-is-like={}", lexicon.render_dim(d))),
                });
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureFlags {
    pub syntactic: bool,
    pub lexical: bool,
    pub semantic: bool,
}

impl FeatureFlags {
    pub const SYNTACTIC: FeatureFlags = FeatureFlags {
        syntactic: true,
        lexical: false,
        semantic: false,
    };

    pub fn is_empty(&self) -> bool {
        !(self.syntactic || self.lexical || self.semantic)
    }

    /// Parses a comma-separated list such as `syn,lex`.
    pub fn parse(list: &str) -> Result<Self, String> {
        let mut flags = FeatureFlags::default();
        for part in list.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "syn" | "syntactic" => flags.syntactic = true,
                "lex" | "lexical" => flags.lexical = true,
                "sem" | "semantic" => flags.semantic = true,
                other => return Err(format!("unknown feature family {other:?}")),
            }
        }
        Ok(flags)
    }
}

impl fmt::Display for FeatureFlags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = [
            (self.syntactic, "syn"),
            (self.lexical, "lex"),
            (self.semantic, "sem"),
        ]
        .into_iter()
        .filter_map(|(on, name)| on.then_some(name))
        .collect();
        f.write_str(&parts.join(","))
    }
}

/// Extracts features for one task with a fixed choice of families.
#[derive(Clone, Debug)]
pub struct Featurizer<'a> {
    flags: FeatureFlags,
    lexicon: Option<&'a SparseLexicon>,
    hidden: HiddenAttributes,
}

impl<'a> Featurizer<'a> {
    pub fn new(
        flags: FeatureFlags,
        lexicon: Option<&'a SparseLexicon>,
        task: Task,
        key: &str,
    ) -> Result<Self, FeatureError> {
        if flags.is_empty() {
            return Err(FeatureError::NoFeatureFamilies);
        }
        if flags.semantic && lexicon.is_none() {
            return Err(FeatureError::MissingLexicon);
        }
        Ok(Featurizer {
            flags,
            lexicon,
            hidden: HiddenAttributes::for_task(task, key),
        })
    }

    pub fn for_dataset(
        flags: FeatureFlags,
        lexicon: Option<&'a SparseLexicon>,
        dataset: &Dataset,
    ) -> Result<Self, FeatureError> {
        Featurizer::new(flags, lexicon, dataset.task, &dataset.task_key)
    }

    pub fn instance_features(
        &self,
        sentence: &Sentence,
        instance: &TaskInstance,
    ) -> Vec<NamedFeature> {
        let focus = collect_focus(sentence, instance);
        let mut out = Vec::new();
        if self.flags.syntactic {
            out.extend(syntactic_features(&focus, sentence, &self.hidden));
        }
        if self.flags.lexical {
            out.extend(lexical_features(&focus, sentence));
        }
        if let (true, Some(lex)) = (self.flags.semantic, self.lexicon) {
            out.extend(semantic_features(&focus, sentence, lex));
        }
        out
    }

    fn all_features(&self, dataset: &Dataset, corpus: &Corpus) -> Vec<Vec<NamedFeature>> {
        dataset
            .instances
            .iter()
            .map(|inst| self.instance_features(&corpus.sentences[inst.sentence], inst))
            .collect()
    }

    /// Builds the feature space from `dataset` (the training split) and
    /// returns it with the training vectors.
    pub fn fit(
        &self,
        dataset: &Dataset,
        corpus: &Corpus,
    ) -> Result<(FeatureSpace, Vec<FeatureVector>), FeatureError> {
        if dataset.is_empty() {
            return Err(FeatureError::NoInstances);
        }
        let raw = self.all_features(dataset, corpus);
        let space = FeatureSpace::from_features(raw.iter().flatten());
        let vectors = raw.iter().map(|f| space.vectorize(f)).collect();
        Ok((space, vectors))
    }

    /// Vectorizes another split in an existing space; unseen names are dropped.
    pub fn transform(
        &self,
        space: &FeatureSpace,
        dataset: &Dataset,
        corpus: &Corpus,
    ) -> Vec<FeatureVector> {
        self.all_features(dataset, corpus)
            .iter()
            .map(|f| space.vectorize(f))
            .collect()
    }
}

/// Builds the feature space and training vectors for `dataset`.
pub fn build_matrix(
    dataset: &Dataset,
    corpus: &Corpus,
    flags: FeatureFlags,
    lexicon: Option<&SparseLexicon>,
) -> Result<(FeatureSpace, Vec<FeatureVector>), FeatureError> {
    Featurizer::for_dataset(flags, lexicon, dataset)?.fit(dataset, corpus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taskgen::tests::{corpus, CUATRO};
    use crate::taskgen::{default_relations, extract_case, extract_word_order, find_relation};

    fn cuatro_instance() -> TaskInstance {
        TaskInstance {
            sentence: 0,
            focus_a: 1,
            focus_b: Some(2),
            label: "before".into(),
        }
    }

    fn names(fs: &[NamedFeature]) -> Vec<&str> {
        fs.iter().map(|f| f.name.as_str()).collect()
    }

    #[test]
    fn focus_of_cuatro() {
        let c = corpus(CUATRO);
        let focus = collect_focus(&c.sentences[0], &cuatro_instance());
        assert_eq!(
            focus.roles,
            vec![(Role::Dep, 1), (Role::Head, 2), (Role::DepHead, 3)]
        );
    }

    #[test]
    fn root_headed_head_has_no_dep_head() {
        let c = corpus(CUATRO);
        // comprados (4) -> fueron (3, root)
        let inst = TaskInstance {
            sentence: 0,
            focus_a: 4,
            focus_b: Some(3),
            label: "after".into(),
        };
        let focus = collect_focus(&c.sentences[0], &inst);
        assert!(focus.get(Role::DepHead).is_none());
        assert_eq!(focus.get(Role::DepChild(1)), Some(5));
        assert_eq!(focus.get(Role::HeadChild(1)), Some(2));
    }

    #[test]
    fn childless_focus_has_no_child_roles() {
        let c = corpus(CUATRO);
        let focus = collect_focus(&c.sentences[0], &cuatro_instance());
        assert!(focus
            .roles
            .iter()
            .all(|(r, _)| !matches!(r, Role::DepChild(_) | Role::HeadChild(_))));
    }

    #[test]
    fn children_capped_and_nearest_first() {
        let src = "\
1\ta\ta\tX\t_\t_\t4\tdep\t_\t_
2\tb\tb\tX\t_\t_\t4\tdep\t_\t_
3\tc\tc\tX\t_\t_\t4\tdep\t_\t_
4\th\th\tNOUN\t_\t_\t0\troot\t_\t_
5\td\td\tX\t_\t_\t4\tdep\t_\t_
6\te\te\tX\t_\t_\t4\tdep\t_\t_

";
        let c = corpus(src);
        let inst = TaskInstance {
            sentence: 0,
            focus_a: 4,
            focus_b: None,
            label: "x".into(),
        };
        let focus = collect_focus(&c.sentences[0], &inst);
        assert_eq!(focus.get(Role::Head), None);
        assert_eq!(focus.get(Role::DepChild(1)), Some(3));
        assert_eq!(focus.get(Role::DepChild(2)), Some(5));
        assert_eq!(focus.get(Role::DepChild(3)), Some(2));
        assert_eq!(focus.get(Role::DepChild(4)), None);
    }

    #[test]
    fn syntactic_features_of_ordinal_adjective() {
        let src = "\
1\tprimeras\tprimero\tADJ\t_\tNumType=Ord\t2\tmod\t_\t_
2\thoras\thora\tNOUN\t_\t_\t0\troot\t_\t_

";
        let c = corpus(src);
        let focus = collect_focus(&c.sentences[0], &cuatro_instance());
        let feats = syntactic_features(&focus, &c.sentences[0], &HiddenAttributes::default());
        assert_eq!(
            names(&feats),
            vec![
                "dep-is-adj",
                "dep-numtype-is-ord",
                "dep-deprel-is-mod",
                "head-is-noun",
                "head-deprel-is-root"
            ]
        );
        assert!(feats
            .iter()
            .all(|f| f.value == 1.0 && f.kind == FeatureKind::Binary));
    }

    #[test]
    fn lexical_features_of_cuatro() {
        let c = corpus(CUATRO);
        let focus = collect_focus(&c.sentences[0], &cuatro_instance());
        let feats = lexical_features(&focus, &c.sentences[0]);
        assert_eq!(
            names(&feats),
            vec![
                "dep-lemma-is-cuatro",
                "head-lemma-is-libro",
                "dep-head-lemma-is-ser"
            ]
        );
    }

    #[test]
    fn absent_lemma_omitted() {
        let c = corpus("1\tx\t_\tX\t_\t_\t0\troot\t_\t_\n\n");
        let inst = TaskInstance {
            sentence: 0,
            focus_a: 1,
            focus_b: None,
            label: "x".into(),
        };
        let focus = collect_focus(&c.sentences[0], &inst);
        assert!(lexical_features(&focus, &c.sentences[0]).is_empty());
    }

    #[test]
    fn semantic_feature_display() {
        let lex = parse_sparse_lexicon(
            "ochenta 0.9 0.0 0.0\nsesenta 0.8 0.0 0.0\ncuatro 0.5 0.0 0.0\nlibros 0.0 0.3 0.0\nhotel 0.0 0.9 0.0\n"
                .as_bytes(),
            2,
        )
        .unwrap();
        let c = corpus(CUATRO);
        let focus = collect_focus(&c.sentences[0], &cuatro_instance());
        let feats = semantic_features(&focus, &c.sentences[0], &lex);
        assert_eq!(names(&feats), vec!["dep-dim0", "head-dim1"]);
        assert_eq!(
            feats[0].display.as_deref(),
            Some("dep-word-is-like={ochenta,sesenta}")
        );
        assert_eq!(feats[0].value, 0.5);
        assert_eq!(feats[0].kind, FeatureKind::Numeric);
    }

    #[test]
    fn semantic_missing_and_zero_words() {
        let lex = parse_sparse_lexicon("cuatro 0.0 0.0\nother 1.0 1.0\n".as_bytes(), 2).unwrap();
        let c = corpus(CUATRO);
        let focus = collect_focus(&c.sentences[0], &cuatro_instance());
        assert!(semantic_features(&focus, &c.sentences[0], &lex).is_empty());
    }

    #[test]
    fn case_task_hides_case_of_focus() {
        let src = "\
1\tev\tev\tNOUN\t_\tCase=Loc|Number=Sing\t2\tcomp\t_\t_
2\tgit\tgit\tVERB\t_\tCase=Nom\t0\troot\t_\t_

";
        let c = corpus(src);
        let ds = extract_case(&c, "NOUN");
        let (space, _) = build_matrix(&ds, &c, FeatureFlags::SYNTACTIC, None).unwrap();
        assert!(space.id("dep-case-is-loc").is_none());
        assert!(space.id("dep-number-is-sing").is_some());
        assert!(space.id("head-case-is-nom").is_some());
    }

    #[test]
    fn build_matrix_contracts() {
        let c = corpus(CUATRO);
        let rels = default_relations();
        let ds = extract_word_order(&c, find_relation(&rels, "adjective-noun").unwrap());
        assert!(matches!(
            build_matrix(&ds, &c, FeatureFlags::default(), None),
            Err(FeatureError::NoFeatureFamilies)
        ));
        let sem = FeatureFlags {
            semantic: true,
            ..Default::default()
        };
        assert!(matches!(
            build_matrix(&ds, &c, sem, None),
            Err(FeatureError::MissingLexicon)
        ));
        let mut empty = ds.clone();
        empty.instances.clear();
        assert!(matches!(
            build_matrix(&empty, &c, FeatureFlags::SYNTACTIC, None),
            Err(FeatureError::NoInstances)
        ));
    }

    #[test]
    fn unseen_lemmas_dropped_at_transform() {
        let train = corpus(CUATRO);
        let test = corpus(
            "1\tnumerosas\tnumeroso\tADJ\t_\t_\t2\tmod\t_\t_\n2\tlenguas\tlengua\tNOUN\t_\t_\t0\troot\t_\t_\n\n",
        );
        let rels = default_relations();
        let rel = find_relation(&rels, "adjective-noun").unwrap();
        let flags = FeatureFlags::parse("syn,lex").unwrap();
        let train_ds = extract_word_order(&train, rel);
        let fz = Featurizer::for_dataset(flags, None, &train_ds).unwrap();
        let (space, _) = fz.fit(&train_ds, &train).unwrap();
        let before = space.clone();
        let test_ds = extract_word_order(&test, rel);
        let vecs = fz.transform(&space, &test_ds, &test);
        assert_eq!(space, before);
        let raw = fz.instance_features(&test.sentences[0], &test_ds.instances[0]);
        assert!(raw.iter().any(|f| f.name == "dep-lemma-is-numeroso"));
        let names: Vec<&str> = vecs[0]
            .entries()
            .iter()
            .map(|(id, _)| space.name(*id))
            .collect();
        assert!(names.contains(&"dep-is-adj"));
        assert!(!names.iter().any(|n| n.contains("numeroso")));
    }

    #[test]
    fn flags_parse_and_display() {
        let f = FeatureFlags::parse("syn,sem").unwrap();
        assert!(f.syntactic && f.semantic && !f.lexical);
        assert_eq!(f.to_string(), "syn,sem");
        assert!(FeatureFlags::parse("syn,xyz").is_err());
    }
}
