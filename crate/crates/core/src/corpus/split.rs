use rand::seq::SliceRandom;

use super::ParsedSentence;
use crate::error::{Error, Result};
use crate::seed;

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusSplit {
    pub train: Vec<ParsedSentence>,
    pub valid: Vec<ParsedSentence>,
    pub test: Vec<ParsedSentence>,
    pub seed: u64,
}

/// Seeded shuffle followed by a contiguous train/valid/test cut. Valid and
/// test sizes are rounded; train takes the remainder.
pub fn split_corpus(corpus: &[ParsedSentence], ratios: [f64; 3], seed: u64) -> Result<CorpusSplit> {
    if corpus.len() < 3 {
        return Err(Error::Config(format!(
            "need at least 3 sentences to split, got {}",
            corpus.len()
        )));
    }
    if ratios.iter().any(|r| !r.is_finite() || *r < 0.0) || (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!("split ratios {ratios:?} must be non-negative and sum to 1")));
    }
    let n = corpus.len();
    let n_valid = ((n as f64) * ratios[1]).round() as usize;
    let n_test = (((n as f64) * ratios[2]).round() as usize).min(n - n_valid);
    let n_train = n - n_valid - n_test;

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng(seed, seed::SPLIT));
    let pick = |range: std::ops::Range<usize>| order[range].iter().map(|&i| corpus[i].clone()).collect();
    Ok(CorpusSplit {
        train: pick(0..n_train),
        valid: pick(n_train..n_train + n_valid),
        test: pick(n_train + n_valid..n),
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::NONE_LABEL;

    fn corpus(n: usize) -> Vec<ParsedSentence> {
        (0..n)
            .map(|i| {
                ParsedSentence::new(vec![format!("t{i}")], vec!["NN".into()], vec![], vec![NONE_LABEL.into()])
                    .unwrap()
            })
            .collect()
    }

    #[test]
    fn eight_one_one_sizes() {
        let s = split_corpus(&corpus(4767), [0.8, 0.1, 0.1], 1).unwrap();
        assert_eq!((s.train.len(), s.valid.len(), s.test.len()), (3813, 477, 477));
    }

    #[test]
    fn all_train() {
        let s = split_corpus(&corpus(10), [1.0, 0.0, 0.0], 1).unwrap();
        assert_eq!((s.train.len(), s.valid.len(), s.test.len()), (10, 0, 0));
    }

    #[test]
    fn too_small_or_bad_ratios() {
        assert!(split_corpus(&corpus(2), [0.8, 0.1, 0.1], 1).is_err());
        assert!(split_corpus(&corpus(5), [0.8, 0.1, 0.2], 1).is_err());
        assert!(split_corpus(&corpus(5), [1.2, -0.1, -0.1], 1).is_err());
    }
}
