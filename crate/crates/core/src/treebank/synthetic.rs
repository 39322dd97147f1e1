//! Deterministic synthetic treebanks with a planted word-order rule.
//!
//! Every generated sentence has the shape
//! `DET [MOD NOUN | NOUN MOD] (ADV) VERB (DET NOUN) .` where the single
//! modifier/noun pair is ordered exactly as the planted rule dictates.

use std::fmt;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Corpus, Morph, Sentence, Split, Token};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    Before,
    After,
}

impl Order {
    pub fn as_str(self) -> &'static str {
        match self {
            Order::Before => "before",
            Order::After => "after",
        }
    }

    pub fn flip(self) -> Order {
        match self {
            Order::Before => Order::After,
            Order::After => Order::Before,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Order {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "before" => Ok(Order::Before),
            "after" => Ok(Order::After),
            other => Err(format!("unknown order {other:?} (expected before/after)")),
        }
    }
}

/// A word-order rule to plant: the modifier goes `when_present` relative
/// to its noun iff it carries `attribute=value`, `otherwise` if not.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedRule {
    pub dependent_upos: String,
    pub deprel: String,
    pub head_upos: String,
    pub attribute: String,
    pub value: String,
    pub when_present: Order,
    pub otherwise: Order,
    /// Probability that a sentence's modifier carries the controlling feature.
    pub match_rate: f64,
}

impl Default for PlantedRule {
    /// Adjective before noun iff `NumType=Ord`.
    fn default() -> Self {
        PlantedRule {
            dependent_upos: "ADJ".into(),
            deprel: "mod".into(),
            head_upos: "NOUN".into(),
            attribute: "NumType".into(),
            value: "Ord".into(),
            when_present: Order::Before,
            otherwise: Order::After,
            match_rate: 0.3,
        }
    }
}

const ORDINAL_STEMS: &[(&str, &str)] = &[
    ("primer", "primero"),
    ("segund", "segundo"),
    ("tercer", "tercero"),
    ("cuart", "cuarto"),
    ("quint", "quinto"),
    ("sext", "sexto"),
    ("séptim", "séptimo"),
    ("octav", "octavo"),
    ("noven", "noveno"),
    ("décim", "décimo"),
];

const PLAIN_STEMS: &[(&str, &str)] = &[
    ("nuev", "nuevo"),
    ("roj", "rojo"),
    ("pequeñ", "pequeño"),
    ("blanc", "blanco"),
    ("antigu", "antiguo"),
    ("famos", "famoso"),
    ("modern", "moderno"),
    ("larg", "largo"),
    ("negr", "negro"),
    ("barat", "barato"),
    ("alt", "alto"),
    ("viej", "viejo"),
];

// (lemma, plural form, gender)
const NOUNS: &[(&str, &str, &str)] = &[
    ("libro", "libros", "Masc"),
    ("disco", "discos", "Masc"),
    ("perro", "perros", "Masc"),
    ("gato", "gatos", "Masc"),
    ("barco", "barcos", "Masc"),
    ("camino", "caminos", "Masc"),
    ("plato", "platos", "Masc"),
    ("vaso", "vasos", "Masc"),
    ("casa", "casas", "Fem"),
    ("mesa", "mesas", "Fem"),
    ("puerta", "puertas", "Fem"),
    ("ventana", "ventanas", "Fem"),
    ("carta", "cartas", "Fem"),
    ("silla", "sillas", "Fem"),
    ("novela", "novelas", "Fem"),
    ("canción", "canciones", "Fem"),
];

// (lemma, 3sg past, 3pl past)
const VERBS: &[(&str, &str, &str)] = &[
    ("comprar", "compró", "compraron"),
    ("ver", "vio", "vieron"),
    ("leer", "leyó", "leyeron"),
    ("tener", "tuvo", "tuvieron"),
    ("buscar", "buscó", "buscaron"),
    ("vender", "vendió", "vendieron"),
    ("encontrar", "encontró", "encontraron"),
];

const ADVERBS: &[&str] = &["ayer", "hoy", "también", "pronto", "siempre"];

struct Nominal {
    lemma: &'static str,
    form: &'static str,
    gender: &'static str,
    plural: bool,
}

fn pick_noun(rng: &mut ChaCha8Rng) -> Nominal {
    let &(lemma, plural_form, gender) = NOUNS.choose(rng).expect("nonempty");
    let plural = rng.random_bool(0.5);
    Nominal {
        lemma,
        form: if plural { plural_form } else { lemma },
        gender,
        plural,
    }
}

fn number(plural: bool) -> &'static str {
    if plural {
        "Plur"
    } else {
        "Sing"
    }
}

fn inflect(stem: &str, gender: &str, plural: bool) -> String {
    let vowel = if gender == "Fem" { "a" } else { "o" };
    format!("{stem}{vowel}{}", if plural { "s" } else { "" })
}

fn determiner(rng: &mut ChaCha8Rng, noun: &Nominal) -> (String, &'static str, Morph) {
    let definite = rng.random_bool(0.6);
    let fem = noun.gender == "Fem";
    let (form, lemma) = match (definite, fem, noun.plural) {
        (true, false, false) => ("el", "el"),
        (true, true, false) => ("la", "el"),
        (true, false, true) => ("los", "el"),
        (true, true, true) => ("las", "el"),
        (false, false, false) => ("un", "uno"),
        (false, true, false) => ("una", "uno"),
        (false, false, true) => ("unos", "uno"),
        (false, true, true) => ("unas", "uno"),
    };
    let mut morph = Morph::new();
    morph.insert(
        "Definite".into(),
        if definite { "Def" } else { "Ind" }.into(),
    );
    morph.insert("Gender".into(), noun.gender.into());
    morph.insert("Number".into(), number(noun.plural).into());
    morph.insert("PronType".into(), "Art".into());
    (form.to_string(), lemma, morph)
}

/// Token under construction; `head` is a 0-based index into the sentence
/// being built, `None` for the root.
struct Draft {
    form: String,
    lemma: String,
    upos: String,
    morph: Morph,
    head: Option<usize>,
    deprel: String,
}

fn nominal_morph(noun: &Nominal) -> Morph {
    let mut morph = Morph::new();
    morph.insert("Gender".into(), noun.gender.into());
    morph.insert("Number".into(), number(noun.plural).into());
    morph
}

fn sentence(rule: &PlantedRule, rng: &mut ChaCha8Rng) -> Sentence {
    let subject = pick_noun(rng);
    let matching = rng.random_bool(rule.match_rate.clamp(0.0, 1.0));
    let order = if matching {
        rule.when_present
    } else {
        rule.otherwise
    };
    let with_adverb = rng.random_bool(0.4);
    let with_object = rng.random_bool(0.5);

    // Positions are decided up front so heads can refer to them.
    let det1 = 0;
    let (modifier, noun1) = match order {
        Order::Before => (1, 2),
        Order::After => (2, 1),
    };
    let mut next = 3;
    let adverb = with_adverb.then(|| {
        next += 1;
        next - 1
    });
    let verb = next;
    next += 1;
    let object = with_object.then(|| {
        next += 2;
        (next - 2, next - 1)
    });
    let punct = next;

    let mut drafts: Vec<Option<Draft>> = (0..=punct).map(|_| None).collect();

    let (form, lemma, morph) = determiner(rng, &subject);
    drafts[det1] = Some(Draft {
        form,
        lemma: lemma.into(),
        upos: "DET".into(),
        morph,
        head: Some(noun1),
        deprel: "det".into(),
    });

    let &(stem, lemma) = if matching {
        ORDINAL_STEMS.choose(rng)
    } else {
        PLAIN_STEMS.choose(rng)
    }
    .expect("nonempty");
    let mut morph = nominal_morph(&subject);
    if matching {
        morph.insert(rule.attribute.clone(), rule.value.clone());
    } else if morph.get(&rule.attribute) == Some(&rule.value) {
        morph.remove(&rule.attribute);
    }
    drafts[modifier] = Some(Draft {
        form: inflect(stem, subject.gender, subject.plural),
        lemma: lemma.into(),
        upos: rule.dependent_upos.clone(),
        morph,
        head: Some(noun1),
        deprel: rule.deprel.clone(),
    });

    drafts[noun1] = Some(Draft {
        form: subject.form.into(),
        lemma: subject.lemma.into(),
        upos: rule.head_upos.clone(),
        morph: nominal_morph(&subject),
        head: Some(verb),
        deprel: "subj".into(),
    });

    if let Some(pos) = adverb {
        let adv = *ADVERBS.choose(rng).expect("nonempty");
        drafts[pos] = Some(Draft {
            form: adv.into(),
            lemma: adv.into(),
            upos: "ADV".into(),
            morph: Morph::new(),
            head: Some(verb),
            deprel: "mod".into(),
        });
    }

    let &(vlemma, sg, pl) = VERBS.choose(rng).expect("nonempty");
    let mut vmorph = Morph::new();
    vmorph.insert("Mood".into(), "Ind".into());
    vmorph.insert("Number".into(), number(subject.plural).into());
    vmorph.insert("Person".into(), "3".into());
    vmorph.insert("Tense".into(), "Past".into());
    vmorph.insert("VerbForm".into(), "Fin".into());
    drafts[verb] = Some(Draft {
        form: if subject.plural { pl } else { sg }.into(),
        lemma: vlemma.into(),
        upos: "VERB".into(),
        morph: vmorph,
        head: None,
        deprel: "root".into(),
    });

    if let Some((det2, noun2)) = object {
        let obj = pick_noun(rng);
        let (form, lemma, morph) = determiner(rng, &obj);
        drafts[det2] = Some(Draft {
            form,
            lemma: lemma.into(),
            upos: "DET".into(),
            morph,
            head: Some(noun2),
            deprel: "det".into(),
        });
        drafts[noun2] = Some(Draft {
            form: obj.form.into(),
            lemma: obj.lemma.into(),
            upos: "NOUN".into(),
            morph: nominal_morph(&obj),
            head: Some(verb),
            deprel: "comp:obj".into(),
        });
    }

    drafts[punct] = Some(Draft {
        form: ".".into(),
        lemma: ".".into(),
        upos: "PUNCT".into(),
        morph: Morph::new(),
        head: Some(verb),
        deprel: "punct".into(),
    });

    let mut tokens: Vec<Token> = drafts
        .into_iter()
        .enumerate()
        .map(|(i, d)| {
            let d = d.expect("every position is filled");
            Token {
                id: i + 1,
                form: d.form,
                lemma: Some(d.lemma),
                upos: Some(d.upos),
                xpos: None,
                morph: d.morph,
                head: d.head.map_or(0, |h| h + 1),
                deprel: Some(d.deprel),
            }
        })
        .collect();
    capitalize(&mut tokens[0].form);

    let mut text = String::new();
    for (i, tok) in tokens.iter().enumerate() {
        if i > 0 && tok.upos.as_deref() != Some("PUNCT") {
            text.push(' ');
        }
        text.push_str(&tok.form);
    }
    Sentence {
        tokens,
        text: Some(text),
    }
}

fn capitalize(s: &mut String) {
    if let Some(first) = s.chars().next() {
        let upper: String = first.to_uppercase().collect();
        s.replace_range(..first.len_utf8(), &upper);
    }
}

/// Generates `n_sentences` sentences following `rule`. Pure in
/// `(rule, n_sentences, seed)`.
pub fn generate_synthetic(rule: &PlantedRule, n_sentences: usize, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sentences = (0..n_sentences).map(|_| sentence(rule, &mut rng)).collect();
    Corpus {
        sentences,
        language: "synth".into(),
        treebank_id: "synth".into(),
        split: Split::Train,
    }
}
