//! Pre-parsed sentences, vocabularies, type inventories, splits, synthetic
//! corpora and pretrained vectors.

mod embeddings;
mod format;
mod inventory;
mod split;
mod synthetic;
mod vocab;

pub use embeddings::load_pretrained_embeddings;
pub use format::{parse_sentence_file, write_sentence_file};
pub use inventory::{build_type_inventories, RelationType, TypeInventories};
pub use split::{split_corpus, CorpusSplit};
pub use synthetic::{generate_synthetic, oracle_labels, EventTemplate, GeneratorConfig};
pub use vocab::{build_vocab, Vocabulary, PADDING, UNKNOWN};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Label of tokens that are not triggers.
pub const NONE_LABEL: &str = "NONE";

/// Directed dependency arc `head -> dependent`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Arc {
    pub head: usize,
    pub dependent: usize,
    pub relation: String,
}

impl Arc {
    pub fn new(head: usize, dependent: usize, relation: impl Into<String>) -> Self {
        Arc {
            head,
            dependent,
            relation: relation.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedSentence {
    pub tokens: Vec<String>,
    pub pos_tags: Vec<String>,
    pub arcs: Vec<Arc>,
    pub labels: Vec<String>,
}

impl ParsedSentence {
    /// Builds and validates a sentence.
    pub fn new(
        tokens: Vec<String>,
        pos_tags: Vec<String>,
        arcs: Vec<Arc>,
        labels: Vec<String>,
    ) -> Result<Self> {
        let s = ParsedSentence {
            tokens,
            pos_tags,
            arcs,
            labels,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.tokens.len();
        if n == 0 {
            return Err(Error::Validation("sentence has no tokens".into()));
        }
        if self.pos_tags.len() != n || self.labels.len() != n {
            return Err(Error::Validation(format!(
                "{} tokens but {} POS tags and {} labels",
                n,
                self.pos_tags.len(),
                self.labels.len()
            )));
        }
        for arc in &self.arcs {
            if arc.head >= n || arc.dependent >= n {
                return Err(Error::Validation(format!(
                    "arc {} -> {} out of range for {n} tokens",
                    arc.head, arc.dependent
                )));
            }
            if arc.head == arc.dependent {
                return Err(Error::Validation(format!("self-arc on token {}", arc.head)));
            }
        }
        Ok(())
    }

    pub fn trigger_count(&self) -> usize {
        self.labels.iter().filter(|l| *l != NONE_LABEL).count()
    }

    /// Same sentence with the label column replaced.
    pub fn with_labels(&self, labels: Vec<String>) -> Result<Self> {
        ParsedSentence::new(self.tokens.clone(), self.pos_tags.clone(), self.arcs.clone(), labels)
    }
}
