use std::collections::{BTreeSet, HashMap};
use std::fmt;

use super::ParsedSentence;
use crate::error::{Error, Result};

/// Edge type: an observed dependency relation, its reverse direction, or
/// the self-loop added to every node.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelationType {
    Base(String),
    Inverse(String),
    SelfLoop,
}

impl fmt::Display for RelationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelationType::Base(r) => write!(f, "{r}"),
            RelationType::Inverse(r) => write!(f, "{r}^-1"),
            RelationType::SelfLoop => write!(f, "SELF_LOOP"),
        }
    }
}

/// Word types (POS tags) and relation types. Relation indices are laid out
/// as `[base..., inverse..., SELF_LOOP]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeInventories {
    word_types: Vec<String>,
    base_relations: Vec<String>,
    word_index: HashMap<String, usize>,
    relation_index: HashMap<String, usize>,
}

impl TypeInventories {
    pub fn new(word_types: Vec<String>, base_relations: Vec<String>) -> Result<Self> {
        if word_types.is_empty() {
            return Err(Error::Config("word type inventory is empty".into()));
        }
        let word_index: HashMap<_, _> =
            word_types.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        let relation_index: HashMap<_, _> =
            base_relations.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        if word_index.len() != word_types.len() || relation_index.len() != base_relations.len() {
            return Err(Error::Config("duplicate entries in type inventory".into()));
        }
        Ok(TypeInventories {
            word_types,
            base_relations,
            word_index,
            relation_index,
        })
    }

    pub fn word_types(&self) -> &[String] {
        &self.word_types
    }

    pub fn base_relations(&self) -> &[String] {
        &self.base_relations
    }

    pub fn word_type_count(&self) -> usize {
        self.word_types.len()
    }

    /// `|R| = 2 * base + 1`.
    pub fn relation_type_count(&self) -> usize {
        2 * self.base_relations.len() + 1
    }

    pub fn relation_types(&self) -> Vec<RelationType> {
        let base = self.base_relations.iter().cloned().map(RelationType::Base);
        let inv = self.base_relations.iter().cloned().map(RelationType::Inverse);
        base.chain(inv).chain(std::iter::once(RelationType::SelfLoop)).collect()
    }

    pub fn word_type_index(&self, pos: &str) -> Result<usize> {
        self.word_index.get(pos).copied().ok_or_else(|| Error::UnknownType {
            kind: "word",
            name: pos.to_string(),
        })
    }

    pub fn relation_index(&self, relation: &RelationType) -> Result<usize> {
        let nb = self.base_relations.len();
        let lookup = |name: &str| {
            self.relation_index.get(name).copied().ok_or_else(|| Error::UnknownType {
                kind: "relation",
                name: name.to_string(),
            })
        };
        match relation {
            RelationType::Base(r) => lookup(r),
            RelationType::Inverse(r) => lookup(r).map(|i| nb + i),
            RelationType::SelfLoop => Ok(2 * nb),
        }
    }
}

pub fn build_type_inventories(corpus: &[ParsedSentence]) -> Result<TypeInventories> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let pos: BTreeSet<&str> = corpus.iter().flat_map(|s| s.pos_tags.iter().map(String::as_str)).collect();
    let rel: BTreeSet<&str> = corpus
        .iter()
        .flat_map(|s| s.arcs.iter().map(|a| a.relation.as_str()))
        .collect();
    TypeInventories::new(
        pos.into_iter().map(str::to_string).collect(),
        rel.into_iter().map(str::to_string).collect(),
    )
}
