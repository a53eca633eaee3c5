use rand::Rng;

use crate::numerics::Tensor;
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DropoutMode {
    Train,
    Eval,
}

/// Inverted-dropout mask: each entry is `0` with probability `rate`,
/// otherwise `1 / (1 - rate)`.
pub fn dropout_mask<R: Rng + ?Sized>(shape: &[usize], rate: f64, rng: &mut R) -> Tensor {
    assert!((0.0..1.0).contains(&rate), "dropout rate {rate} outside [0, 1)");
    let keep = 1.0 / (1.0 - rate);
    let mut mask = Tensor::zeros(shape);
    for v in mask.data_mut() {
        *v = if rng.random::<f64>() < rate { 0.0 } else { keep };
    }
    mask
}

/// Identity in eval mode or at rate 0.
pub fn apply_dropout(x: &Tensor, rate: f64, seed_value: u64, mode: DropoutMode) -> Tensor {
    if mode == DropoutMode::Eval || rate == 0.0 {
        return x.clone();
    }
    let mask = dropout_mask(x.shape(), rate, &mut seed::rng(seed_value, seed::DROPOUT));
    let mut out = x.clone();
    for (v, m) in out.data_mut().iter_mut().zip(mask.data()) {
        *v *= m;
    }
    out
}
