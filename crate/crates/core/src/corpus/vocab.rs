use std::collections::HashMap;

use super::ParsedSentence;
use crate::error::{Error, Result};

pub const PADDING: &str = "<pad>";
pub const UNKNOWN: &str = "<unk>";

/// Token index. `<pad>` is 0 and `<unk>` is 1; everything else follows in
/// frequency-descending, then lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub const PADDING_INDEX: usize = 0;
    pub const UNKNOWN_INDEX: usize = 1;

    /// Rebuilds a vocabulary from its ordered token list (specials first).
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        if tokens.len() < 2 || tokens[0] != PADDING || tokens[1] != UNKNOWN {
            return Err(Error::Checkpoint("vocabulary must start with <pad>, <unk>".into()));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::Checkpoint(format!("duplicate vocabulary entry `{t}`")));
            }
        }
        Ok(Vocabulary { tokens, index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of `token`, or the unknown index.
    pub fn index(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(Self::UNKNOWN_INDEX)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn token(&self, index: usize) -> Option<&str> {
        self.tokens.get(index).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn encode(&self, sentence: &ParsedSentence) -> Vec<usize> {
        sentence.tokens.iter().map(|t| self.index(t)).collect()
    }
}

pub fn build_vocab(corpus: &[ParsedSentence], min_count: usize) -> Result<Vocabulary> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if min_count == 0 {
        return Err(Error::Config("min_count must be at least 1".into()));
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for s in corpus {
        for t in &s.tokens {
            *counts.entry(t.as_str()).or_default() += 1;
        }
    }
    let mut kept: Vec<(&str, usize)> = counts
        .into_iter()
        .filter(|&(t, c)| c >= min_count && t != PADDING && t != UNKNOWN)
        .collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));

    let tokens = [PADDING, UNKNOWN]
        .into_iter()
        .chain(kept.into_iter().map(|(t, _)| t))
        .map(str::to_string)
        .collect();
    Vocabulary::from_tokens(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::NONE_LABEL;

    fn sentence(words: &[&str]) -> ParsedSentence {
        ParsedSentence::new(
            words.iter().map(|w| w.to_string()).collect(),
            vec!["NN".into(); words.len()],
            vec![],
            vec![NONE_LABEL.into(); words.len()],
        )
        .unwrap()
    }

    #[test]
    fn frequent_tokens_are_kept() {
        let corpus = vec![sentence(&["voltage", "voltage", "drop"]), sentence(&["voltage"])];
        let v = build_vocab(&corpus, 2).unwrap();
        assert!(v.contains("voltage"));
        assert!(!v.contains("drop"));
        assert_eq!(v.index("drop"), Vocabulary::UNKNOWN_INDEX);
        assert_eq!(v.index("voltage"), 2);
    }

    #[test]
    fn high_min_count_leaves_specials() {
        let v = build_vocab(&[sentence(&["a", "b", "c"])], 5).unwrap();
        assert_eq!(v.tokens(), &[PADDING, UNKNOWN]);
    }

    #[test]
    fn ordering_is_deterministic() {
        let corpus = vec![sentence(&["b", "a", "c", "c", "a", "d"])];
        let first = build_vocab(&corpus, 1).unwrap();
        let second = build_vocab(&corpus, 1).unwrap();
        assert_eq!(first, second);
        assert_eq!(&first.tokens()[2..], &["a", "c", "b", "d"]);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        assert!(matches!(build_vocab(&[], 1), Err(Error::EmptyCorpus)));
    }
}
