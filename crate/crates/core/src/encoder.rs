//! Token embeddings and the bidirectional LSTM that produces `H⁰`.

use crate::corpus::{ParsedSentence, Vocabulary};
use crate::error::Result;
use crate::numerics::{Tape, Tensor, Var};

/// One LSTM direction. Gate columns are laid out `[input, forget, cell, output]`.
#[derive(Clone, Copy, Debug)]
pub struct LstmVars {
    /// `[d_in, 4h]`
    pub w_ih: Var,
    /// `[h, 4h]`
    pub w_hh: Var,
    /// `[1, 4h]`
    pub bias: Var,
}

#[derive(Clone, Copy, Debug)]
pub struct EncoderVars {
    pub forward: LstmVars,
    pub backward: LstmVars,
    pub hidden: usize,
}

/// Rows of `table` for each token, unknown tokens mapped to `<unk>`.
pub fn embed(sentence: &ParsedSentence, vocab: &Vocabulary, table: &Tensor) -> Tensor {
    let rows: Vec<Vec<f64>> = vocab
        .encode(sentence)
        .into_iter()
        .map(|i| table.row(i).to_vec())
        .collect();
    Tensor::from_rows(&rows)
}

pub fn embed_on_tape(tape: &mut Tape, table: Var, token_indices: &[usize]) -> Result<Var> {
    tape.gather_rows(table, token_indices)
}

/// Runs one direction over `x` (`[n, d_in]`). The result keeps the original
/// row order even when `reverse` is set.
pub fn run_direction(tape: &mut Tape, x: Var, w: &LstmVars, hidden: usize, reverse: bool) -> Result<Var> {
    let n = tape.value(x).rows();
    let projected = tape.matmul(x, w.w_ih)?;
    let pre = tape.add_row(projected, w.bias)?;
    let mut h = tape.constant(Tensor::zeros(&[1, hidden]));
    let mut c = tape.constant(Tensor::zeros(&[1, hidden]));
    let mut states = vec![h; n];

    let steps: Vec<usize> = if reverse { (0..n).rev().collect() } else { (0..n).collect() };
    for t in steps {
        let x_t = tape.gather_rows(pre, &[t])?;
        let rec = tape.matmul(h, w.w_hh)?;
        let gates = tape.add(x_t, rec)?;
        let i_pre = tape.slice_cols(gates, 0, hidden)?;
        let f_pre = tape.slice_cols(gates, hidden, 2 * hidden)?;
        let g_pre = tape.slice_cols(gates, 2 * hidden, 3 * hidden)?;
        let o_pre = tape.slice_cols(gates, 3 * hidden, 4 * hidden)?;
        let i = tape.sigmoid(i_pre);
        let f = tape.sigmoid(f_pre);
        let g = tape.tanh(g_pre);
        let o = tape.sigmoid(o_pre);
        let keep = tape.mul(f, c)?;
        let write = tape.mul(i, g)?;
        c = tape.add(keep, write)?;
        let squashed = tape.tanh(c);
        h = tape.mul(o, squashed)?;
        states[t] = h;
    }
    tape.concat_rows(&states)
}

/// `H⁰[i] = [forward_i || backward_i]`, shape `[n, 2h]`.
pub fn encode(tape: &mut Tape, x: Var, vars: &EncoderVars) -> Result<Var> {
    let fwd = run_direction(tape, x, &vars.forward, vars.hidden, false)?;
    let bwd = run_direction(tape, x, &vars.backward, vars.hidden, true)?;
    tape.concat_cols(&[fwd, bwd])
}
