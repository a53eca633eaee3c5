use crate::error::Result;
use crate::numerics::{Tape, Tensor, Var};

/// Thresholded cosine similarity between rows of `h`.
///
/// `α_ij = cos(h_i, h_j)` when it reaches `rho`, else 0. The diagonal is 1
/// and the matrix is exactly symmetric. A zero row has cosine 0 with every
/// other row.
pub fn semantic_adjacency(h: &Tensor, rho: f64) -> Tensor {
    let n = h.rows();
    let norms: Vec<f64> = (0..n).map(|i| h.row(i).iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    if norms.contains(&0.0) {
        log::warn!("semantic adjacency: zero-norm row, its similarities are set to 0");
    }
    let mut alpha = Tensor::identity(n);
    for i in 0..n {
        for j in i + 1..n {
            let cos = if norms[i] == 0.0 || norms[j] == 0.0 {
                0.0
            } else {
                let dot: f64 = h.row(i).iter().zip(h.row(j)).map(|(a, b)| a * b).sum();
                dot / (norms[i] * norms[j])
            };
            let v = if cos >= rho { cos } else { 0.0 };
            alpha.set(i, j, v);
            alpha.set(j, i, v);
        }
    }
    alpha
}

/// Row-normalised similarity graph over `h0`, then `tanh(W ·)` per layer.
///
/// The adjacency is a constant on the tape: gradients reach `W` and the node
/// features but not the similarity structure. Pass `snapshot` to reuse a
/// previously computed adjacency instead of rebuilding it from `h0`.
pub fn semantic_channel_forward(
    tape: &mut Tape,
    h0: Var,
    rho: f64,
    layers: &[Var],
    snapshot: Option<&Tensor>,
) -> Result<(Var, Tensor)> {
    let alpha = match snapshot {
        Some(a) => a.clone(),
        None => semantic_adjacency(tape.value(h0), rho),
    };
    let mut normalized = alpha.clone();
    for i in 0..normalized.rows() {
        let total: f64 = normalized.row(i).iter().sum();
        for v in normalized.row_mut(i) {
            *v /= total;
        }
    }
    let adj = tape.constant(normalized);
    let mut h = h0;
    for &w in layers {
        let agg = tape.matmul(adj, h)?;
        let lin = tape.matmul(agg, w)?;
        h = tape.tanh(lin);
    }
    Ok((h, alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identical_rows_are_fully_similar() {
        let h = Tensor::from_rows(&[vec![1.0, 2.0], vec![1.0, 2.0]]);
        assert!((semantic_adjacency(&h, 0.15).get(0, 1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn orthogonal_rows_are_cut() {
        let h = Tensor::from_rows(&[vec![1.0, 0.0], vec![0.0, 3.0]]);
        let a = semantic_adjacency(&h, 0.15);
        assert_eq!(a.get(0, 1), 0.0);
        assert_eq!(a.get(1, 1), 1.0);
    }

    #[test]
    fn zero_row_is_isolated() {
        let h = Tensor::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0]]);
        let a = semantic_adjacency(&h, -1.0);
        assert_eq!(a.data(), &[1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn threshold_above_one_reduces_to_per_node_transform() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = Tensor::randn(&[4, 3], 1.0, &mut rng);
        let w = Tensor::randn(&[3, 3], 1.0, &mut rng);
        let mut tape = Tape::new();
        let hv = tape.constant(h.clone());
        let wv = tape.param(w.clone());
        let (out, alpha) = semantic_channel_forward(&mut tape, hv, 1.01, &[wv], None).unwrap();
        assert_eq!(alpha, Tensor::identity(4));
        let direct = h.matmul(&w).unwrap().map(f64::tanh);
        assert_eq!(tape.value(out), &direct);
    }

    #[test]
    fn three_node_trace_with_fixed_alpha() {
        let h = Tensor::from_rows(&[vec![1.0, 0.0], vec![0.5, 0.5], vec![-1.0, 2.0]]);
        let alpha = Tensor::from_rows(&[vec![1.0, 0.6, 0.0], vec![0.6, 1.0, 0.2], vec![0.0, 0.2, 1.0]]);
        let w = Tensor::from_rows(&[vec![0.3, -0.2], vec![0.1, 0.4]]);
        let mut expected = [[0.0; 2]; 3];
        for i in 0..3 {
            let total: f64 = (0..3).map(|k| alpha.get(i, k)).sum();
            let agg: [f64; 2] = std::array::from_fn(|c| (0..3).map(|j| alpha.get(i, j) / total * h.get(j, c)).sum());
            for c in 0..2 {
                expected[i][c] = (agg[0] * w.get(0, c) + agg[1] * w.get(1, c)).tanh();
            }
        }
        let mut tape = Tape::new();
        let hv = tape.constant(h);
        let wv = tape.param(w);
        let (out, _) = semantic_channel_forward(&mut tape, hv, 0.5, &[wv], Some(&alpha)).unwrap();
        for i in 0..3 {
            for c in 0..2 {
                assert!((tape.value(out).get(i, c) - expected[i][c]).abs() < 1e-12);
            }
        }
    }
}
