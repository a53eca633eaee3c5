//! Seeded template corpus with structurally recoverable labels.
//!
//! Every event type is a `(lemma set, relation signature, trigger POS)`
//! template. A token is a trigger of type `T` exactly when its surface form is
//! one of `T`'s lemmas, its POS is `T`'s trigger POS, and it heads an arc of
//! `T`'s relation onto an `NN` token. Event types are generated in pairs that
//! share lemmas and differ only in the relation, and decoy sentences keep the
//! lemma but break either the POS or the relation, so no single kind of type
//! information is enough to recover the labels.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Arc, ParsedSentence, NONE_LABEL};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Clone, Debug, PartialEq)]
pub struct EventTemplate {
    pub name: String,
    pub lemmas: Vec<String>,
    pub relation: String,
    pub trigger_pos: String,
}

impl EventTemplate {
    fn new(name: &str, lemmas: &[&str], relation: &str, trigger_pos: &str) -> Self {
        EventTemplate {
            name: name.into(),
            lemmas: lemmas.iter().map(|s| s.to_string()).collect(),
            relation: relation.into(),
            trigger_pos: trigger_pos.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorConfig {
    pub sentences: usize,
    pub event_types: Vec<EventTemplate>,
    pub min_len: usize,
    pub max_len: usize,
    /// Probability that a filler token is an unattached-looking noise token.
    pub noise_rate: f64,
    /// Probability that a sentence's candidate trigger is broken on purpose.
    pub decoy_rate: f64,
}

const DEVICE_POS: &str = "NN";
const DECOY_POS: &str = "NN";
const DECOY_RELATION: &str = "dep";
const DEVICES: &[&str] = &[
    "transformer", "breaker", "cable", "insulator", "switch", "relay", "meter", "capacitor", "busbar",
    "feeder", "generator", "arrester",
];
const ADJECTIVES: &[&str] = &["main", "backup", "high", "old", "spare", "outdoor"];
const ADVERBS: &[&str] = &["again", "quickly", "already", "still", "today"];
const DETERMINERS: &[&str] = &["the", "this", "each"];
const NOISE: &[(&str, &str)] = &[("2", "CD"), ("kv", "NNS"), ("...", "PU"), ("ok", "UH"), ("35", "CD")];

impl Default for GeneratorConfig {
    fn default() -> Self {
        let pair_a = ["measure", "test", "record"];
        let pair_b = ["require", "expect", "inspect"];
        let pair_c = ["break", "burn", "fail"];
        GeneratorConfig {
            sentences: 1000,
            event_types: vec![
                EventTemplate::new("measurement", &pair_a, "obj", "VB"),
                EventTemplate::new("statistics", &pair_a, "nmod", "VB"),
                EventTemplate::new("requirement", &pair_b, "obj", "VB"),
                EventTemplate::new("operate", &pair_b, "nsubj", "VB"),
                EventTemplate::new("happen", &pair_c, "nsubj", "VBD"),
                EventTemplate::new("defect", &pair_c, "obj", "VBD"),
            ],
            min_len: 4,
            max_len: 12,
            noise_rate: 0.1,
            decoy_rate: 0.4,
        }
    }
}

impl GeneratorConfig {
    pub fn with_sentences(mut self, n: usize) -> Self {
        self.sentences = n;
        self
    }

    pub fn label_set(&self) -> Vec<String> {
        let mut labels: Vec<String> = self.event_types.iter().map(|t| t.name.clone()).collect();
        labels.sort();
        labels.dedup();
        labels
    }

    fn validate(&self) -> Result<()> {
        if self.min_len < 2 || self.max_len < self.min_len {
            return Err(Error::Config(format!(
                "sentence length range [{}, {}] must start at 2 or more",
                self.min_len, self.max_len
            )));
        }
        if self.event_types.is_empty() {
            return Err(Error::Config("event-type inventory is empty".into()));
        }
        for rate in [self.noise_rate, self.decoy_rate] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::Config(format!("rate {rate} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// Signature relations of every template that uses `lemma`.
    fn relations_for(&self, lemma: &str) -> Vec<&str> {
        self.event_types
            .iter()
            .filter(|t| t.lemmas.iter().any(|l| l == lemma))
            .map(|t| t.relation.as_str())
            .collect()
    }
}

/// Applies the template rules to POS tags and arcs alone.
pub fn oracle_labels(config: &GeneratorConfig, sentence: &ParsedSentence) -> Vec<String> {
    (0..sentence.len())
        .map(|i| {
            config
                .event_types
                .iter()
                .find(|t| {
                    t.lemmas.iter().any(|l| *l == sentence.tokens[i])
                        && sentence.pos_tags[i] == t.trigger_pos
                        && sentence.arcs.iter().any(|a| {
                            a.head == i && a.relation == t.relation && sentence.pos_tags[a.dependent] == DEVICE_POS
                        })
                })
                .map_or_else(|| NONE_LABEL.to_string(), |t| t.name.clone())
        })
        .collect()
}

struct Draft {
    tokens: Vec<(String, String)>,
    /// `(head, dependent, relation)` over draft positions.
    arcs: Vec<(usize, usize, String)>,
}

impl Draft {
    fn push(&mut self, word: &str, pos: &str) -> usize {
        self.tokens.push((word.into(), pos.into()));
        self.tokens.len() - 1
    }
}

fn one<'a, T>(items: &'a [T], rng: &mut ChaCha8Rng) -> &'a T {
    items.choose(rng).expect("non-empty")
}

fn sentence(config: &GeneratorConfig, rng: &mut ChaCha8Rng) -> Result<ParsedSentence> {
    let len = rng.random_range(config.min_len..=config.max_len);
    let template = one(&config.event_types, rng);
    let lemma = one(&template.lemmas, rng).clone();

    let mut trigger_pos = template.trigger_pos.clone();
    let mut relation = template.relation.clone();
    let decoy = rng.random_bool(config.decoy_rate);
    if decoy {
        if rng.random_bool(0.5) {
            trigger_pos = DECOY_POS.into();
        } else {
            let used = config.relations_for(&lemma);
            let mut pool: Vec<&str> = config
                .event_types
                .iter()
                .map(|t| t.relation.as_str())
                .filter(|r| !used.contains(r))
                .collect();
            pool.sort_unstable();
            pool.dedup();
            pool.push(DECOY_RELATION);
            relation = one(&pool, rng).to_string();
        }
    }

    let mut d = Draft {
        tokens: Vec::new(),
        arcs: Vec::new(),
    };
    let trigger = d.push(&lemma, &trigger_pos);
    let device = d.push(one(DEVICES, rng), DEVICE_POS);
    d.arcs.push((trigger, device, relation));
    let adjective = if len >= 3 && rng.random_bool(0.5) {
        let a = d.push(one(ADJECTIVES, rng), "JJ");
        d.arcs.push((device, a, "amod".into()));
        Some(a)
    } else {
        None
    };
    while d.tokens.len() < len {
        if rng.random_bool(config.noise_rate) {
            let (w, p) = *one(NOISE, rng);
            let t = d.push(w, p);
            let head = if rng.random_bool(0.5) { trigger } else { device };
            let rel = if p == "PU" { "punct" } else { DECOY_RELATION };
            d.arcs.push((head, t, rel.into()));
        } else if rng.random_bool(0.5) {
            let t = d.push(one(ADVERBS, rng), "RB");
            d.arcs.push((trigger, t, "advmod".into()));
        } else {
            let t = d.push(one(DETERMINERS, rng), "DT");
            d.arcs.push((device, t, "det".into()));
        }
    }

    // Word order: the device phrase goes before or after the trigger at
    // random, independent of the relation; other tokens are scattered.
    let mut order: Vec<usize> = Vec::with_capacity(len);
    let device_phrase: Vec<usize> = adjective.into_iter().chain(std::iter::once(device)).collect();
    if rng.random_bool(0.5) {
        order.push(trigger);
        order.extend(&device_phrase);
    } else {
        order.extend(&device_phrase);
        order.push(trigger);
    }
    for extra in (0..d.tokens.len()).filter(|i| *i != trigger && *i != device && Some(*i) != adjective) {
        let at = rng.random_range(0..=order.len());
        order.insert(at, extra);
    }
    let mut position = vec![0; d.tokens.len()];
    for (pos, &draft) in order.iter().enumerate() {
        position[draft] = pos;
    }

    let tokens = order.iter().map(|&i| d.tokens[i].0.clone()).collect();
    let pos_tags = order.iter().map(|&i| d.tokens[i].1.clone()).collect();
    let mut arcs: Vec<Arc> = d
        .arcs
        .iter()
        .map(|(h, dep, r)| Arc::new(position[*h], position[*dep], r.clone()))
        .collect();
    arcs.sort_by_key(|a| a.dependent);
    let mut labels = vec![NONE_LABEL.to_string(); len];
    if !decoy {
        labels[position[trigger]] = template.name.clone();
    }
    ParsedSentence::new(tokens, pos_tags, arcs, labels)
}

pub fn generate_synthetic(config: &GeneratorConfig, seed: u64) -> Result<Vec<ParsedSentence>> {
    config.validate()?;
    let mut rng = seed::rng(seed, seed::GENERATOR);
    (0..config.sentences).map(|_| sentence(config, &mut rng)).collect()
}
