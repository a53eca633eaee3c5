//! Channel fusion, per-token classification and the summed NLL loss.

use crate::corpus::ParsedSentence;
use crate::error::{Error, Result};
use crate::model::{Model, Prediction};
use crate::numerics::{Tape, Tensor, Var};

/// Probability floor applied before taking logs.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FusionParameters {
    pub lambdas: [f64; 3],
    /// Train the weights with the rest of the model instead of holding them fixed.
    pub learnable: bool,
}

impl FusionParameters {
    pub fn fixed(lambdas: [f64; 3]) -> Self {
        FusionParameters {
            lambdas,
            learnable: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambdas.iter().any(|l| !l.is_finite() || *l < 0.0) || self.lambdas.iter().sum::<f64>() <= 0.0 {
            return Err(Error::Config(format!(
                "fusion weights {:?} must be non-negative with a positive sum",
                self.lambdas
            )));
        }
        Ok(())
    }

    pub fn as_tensor(&self) -> Tensor {
        Tensor::matrix(1, 3, self.lambdas.to_vec()).expect("1x3")
    }
}

/// `Z = (λ1 H_r + λ2 H_w + λ3 H_s) / (λ1 + λ2 + λ3)` with `lambdas` a `[1, 3]` node.
pub fn fuse(tape: &mut Tape, h_r: Var, h_w: Var, h_s: Var, lambdas: Var) -> Result<Var> {
    if tape.value(lambdas).len() != 3 {
        return Err(Error::dim("fuse", tape.shape(lambdas), &[1, 3]));
    }
    let mut terms = Vec::with_capacity(3);
    for (k, h) in [h_r, h_w, h_s].into_iter().enumerate() {
        let lam = tape.slice_cols(lambdas, k, k + 1)?;
        terms.push(tape.scale_by(h, lam)?);
    }
    let partial = tape.add(terms[0], terms[1])?;
    let weighted = tape.add(partial, terms[2])?;
    let total = tape.sum(lambdas);
    tape.div_by(weighted, total)
}

/// Row-wise `softmax(Z W_t + b_t)`.
pub fn classify(tape: &mut Tape, z: Var, w_t: Var, b_t: Var) -> Result<Var> {
    let scores = tape.matmul(z, w_t)?;
    let logits = tape.add_row(scores, b_t)?;
    tape.softmax_rows(logits)
}

/// `-Σ log p(gold)`, summed over tokens.
pub fn nll_loss(tape: &mut Tape, probs: Var, gold: &[usize]) -> Result<Var> {
    let picked = tape.pick_cols(probs, gold)?;
    let logs = tape.log_floor(picked, PROB_FLOOR);
    let total = tape.sum(logs);
    Ok(tape.scale(total, -1.0))
}

/// Argmax per row; the lowest index wins ties.
pub fn argmax_rows(probs: &Tensor) -> Vec<usize> {
    (0..probs.rows())
        .map(|r| {
            probs
                .row(r)
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (i, &p)| if p > best.1 { (i, p) } else { best })
                .0
        })
        .collect()
}

/// Full evaluation-mode pipeline for one sentence.
pub fn predict(sentence: &ParsedSentence, model: &Model) -> Result<Prediction> {
    model.predict(sentence)
}
