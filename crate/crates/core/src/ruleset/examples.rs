use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Rule;
use crate::taskgen::TaskInstance;
use crate::treebank::Corpus;

/// An illustrative training sentence for a rule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub sentence: usize,
    /// Focus token ids: the dependent first, then the head if any.
    pub focus: Vec<usize>,
    pub label: String,
    /// Surface forms of the sentence, in order.
    pub tokens: Vec<String>,
    pub text: String,
}

fn lemma_key(instance: &TaskInstance, corpus: &Corpus) -> Vec<String> {
    let sentence = &corpus.sentences[instance.sentence];
    instance
        .focus_ids()
        .into_iter()
        .map(|id| {
            sentence
                .token(id)
                .map(|t| t.lemma.clone().unwrap_or_else(|| t.form.clone()))
                .unwrap_or_default()
        })
        .collect()
}

fn pick<'a>(
    instances: impl Iterator<Item = &'a TaskInstance>,
    corpus: &Corpus,
    rng: &mut ChaCha8Rng,
    limit: usize,
) -> Vec<Example> {
    let mut groups: BTreeMap<Vec<String>, &'a TaskInstance> = BTreeMap::new();
    for inst in instances {
        let len = corpus.sentences[inst.sentence].len();
        groups
            .entry(lemma_key(inst, corpus))
            .and_modify(|best| {
                let best_len = corpus.sentences[best.sentence].len();
                if len < best_len {
                    *best = inst;
                }
            })
            .or_insert(inst);
    }
    let mut chosen: Vec<&'a TaskInstance> = groups.into_values().collect();
    chosen.shuffle(rng);
    chosen.truncate(limit);
    chosen
        .into_iter()
        .map(|inst| Example {
            sentence: inst.sentence,
            focus: inst.focus_ids(),
            label: inst.label.clone(),
            tokens: corpus.sentences[inst.sentence]
                .tokens
                .iter()
                .map(|t| t.form.clone())
                .collect(),
            text: corpus.sentences[inst.sentence].surface(),
        })
        .collect()
}

/// Picks up to `limit` positive and negative examples among the training
/// instances routed to the rule's leaf. Instances are grouped by the
/// lemmas of their focus words, the shortest sentence stands for each
/// group, and groups are drawn in a seeded random order.
pub fn select_examples(
    rule: &Rule,
    routed: &[&TaskInstance],
    corpus: &Corpus,
    seed: u64,
    limit: usize,
) -> (Vec<Example>, Vec<Example>) {
    let label = rule.example_label();
    let mut rng =
        ChaCha8Rng::seed_from_u64(seed ^ (rule.leaf as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let positives = pick(
        routed.iter().copied().filter(|i| i.label == label),
        corpus,
        &mut rng,
        limit,
    );
    let negatives = pick(
        routed.iter().copied().filter(|i| i.label != label),
        corpus,
        &mut rng,
        limit,
    );
    (positives, negatives)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ruleset::RuleLabel;
    use crate::taskgen::tests::corpus;

    fn rule() -> Rule {
        Rule {
            leaf: 0,
            conditions: vec![],
            label: RuleLabel::Predicts("before".into()),
            majority: "before".into(),
            p_value: 0.0,
            support: vec![],
            positives: vec![],
            negatives: vec![],
        }
    }

    fn sentence(words: usize, lemma: &str) -> String {
        let mut s = String::new();
        for i in 1..=words {
            let (l, head, rel) = match i {
                1 => (lemma, 2, "mod"),
                2 => ("casa", 0, "root"),
                _ => ("x", 2, "dep"),
            };
            s.push_str(&format!("{i}\tw{i}\t{l}\tX\t_\t_\t{head}\t{rel}\t_\t_\n"));
        }
        s.push('\n');
        s
    }

    fn inst(s: usize, label: &str) -> TaskInstance {
        TaskInstance {
            sentence: s,
            focus_a: 1,
            focus_b: Some(2),
            label: label.into(),
        }
    }

    #[test]
    fn shortest_sentence_represents_group() {
        let c = corpus(&(sentence(9, "gran") + &sentence(5, "gran")));
        let a = inst(0, "before");
        let b = inst(1, "before");
        let (pos, neg) = select_examples(&rule(), &[&a, &b], &c, 1, 10);
        assert_eq!(pos.len(), 1);
        assert_eq!(pos[0].sentence, 1);
        assert_eq!(pos[0].tokens.len(), 5);
        assert!(neg.is_empty());
    }

    #[test]
    fn groups_labels_and_limit() {
        let src: String = ["a", "b", "c", "d"]
            .iter()
            .map(|l| sentence(3, l))
            .collect();
        let c = corpus(&src);
        let insts = [
            inst(0, "before"),
            inst(1, "before"),
            inst(2, "before"),
            inst(3, "after"),
        ];
        let refs: Vec<&TaskInstance> = insts.iter().collect();
        let (pos, neg) = select_examples(&rule(), &refs, &c, 7, 10);
        assert_eq!(pos.len(), 3);
        assert!(pos.iter().all(|e| e.label == "before"));
        assert_eq!(neg.len(), 1);
        assert_eq!(neg[0].label, "after");
        let (pos2, _) = select_examples(&rule(), &refs, &c, 7, 10);
        assert_eq!(pos, pos2);
        let (few, _) = select_examples(&rule(), &refs, &c, 7, 2);
        assert_eq!(few.len(), 2);
    }
}
