use rand_distr::{Distribution, Normal};

use super::Vocabulary;
use crate::error::{Error, Result};
use crate::numerics::Tensor;
use crate::seed;

/// Standard deviation of rows not covered by the vector file.
pub const RANDOM_ROW_STD: f64 = 0.1;

/// Reads `token v1 ... v_dim` lines into a `|V| x dim` table. Rows of
/// vocabulary entries missing from the file are drawn from a seeded Gaussian.
/// Tokens outside the vocabulary are skipped.
pub fn load_pretrained_embeddings(text: &str, vocab: &Vocabulary, dim: usize, seed: u64) -> Result<Tensor> {
    let mut rng = seed::rng(seed, seed::EMBEDDINGS);
    let normal = Normal::new(0.0, RANDOM_ROW_STD).expect("valid std");
    let mut table = Tensor::zeros(&[vocab.len(), dim]);
    for v in table.data_mut() {
        *v = normal.sample(&mut rng);
    }
    for line in text.lines() {
        let mut fields = line.split_whitespace();
        let Some(token) = fields.next() else { continue };
        let values: Vec<&str> = fields.collect();
        if values.len() != dim {
            return Err(Error::EmbeddingDimension {
                token: token.to_string(),
                expected: dim,
                found: values.len(),
            });
        }
        if !vocab.contains(token) {
            continue;
        }
        let row = vocab.index(token);
        for (slot, raw) in table.row_mut(row).iter_mut().zip(values) {
            *slot = raw.parse().map_err(|_| Error::EmbeddingDimension {
                token: token.to_string(),
                expected: dim,
                found: 0,
            })?;
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocab, ParsedSentence, NONE_LABEL};

    fn vocab() -> Vocabulary {
        let words = ["breaker", "cable", "meter", "relay"];
        let s = ParsedSentence::new(
            words.iter().map(|w| w.to_string()).collect(),
            vec!["NN".into(); 4],
            vec![],
            vec![NONE_LABEL.into(); 4],
        )
        .unwrap();
        build_vocab(&[s], 1).unwrap()
    }

    #[test]
    fn covered_rows_match_file() {
        let v = vocab();
        let text = "breaker 1 2 3\nmeter 4 5 6\nunused 0 0 0\n";
        let t = load_pretrained_embeddings(text, &v, 3, 1).unwrap();
        assert_eq!(t.shape(), &[6, 3]);
        assert_eq!(t.row(v.index("breaker")), &[1.0, 2.0, 3.0]);
        assert_eq!(t.row(v.index("meter")), &[4.0, 5.0, 6.0]);
        assert_ne!(t.row(v.index("cable")), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn empty_file_is_seeded_gaussian() {
        let v = vocab();
        let a = load_pretrained_embeddings("", &v, 100, 4).unwrap();
        let b = load_pretrained_embeddings("", &v, 100, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.shape(), &[6, 100]);
        assert_ne!(a, load_pretrained_embeddings("", &v, 100, 5).unwrap());
    }

    #[test]
    fn wrong_width_names_token() {
        let err = load_pretrained_embeddings("cable 1 2\n", &vocab(), 3, 1).unwrap_err();
        assert!(err.to_string().contains("cable"), "{err}");
    }
}
