//! Reverse-mode differentiation over a flat, append-only tape.
//!
//! Nodes are pushed in evaluation order, so the tape index order is already a
//! topological order and the graph cannot contain cycles. `backward` walks the
//! indices downwards from the loss, visiting each reachable node once.

use crate::error::{Error, Result};
use crate::numerics::tensor::Tensor;

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    /// `[n, d] + [1, d]`, the row is broadcast.
    AddRow(Var, Var),
    Mul(Var, Var),
    /// `[n, d] * [n, 1]`, the column is broadcast.
    MulCol(Var, Var),
    Scale(Var, f64),
    DivScalar(Var, f64),
    /// Multiply by a one-element node.
    ScaleBy(Var, Var),
    /// Divide by a one-element node.
    DivBy(Var, Var),
    Recip(Var),
    ConcatCols(Vec<Var>),
    ConcatRows(Vec<Var>),
    SliceCols(Var, usize),
    Tanh(Var),
    Sigmoid(Var),
    SoftmaxRows(Var),
    L2NormRows(Var),
    Sum(Var),
    GatherRows(Var, Vec<usize>),
    ScatterAddRows(Var, Vec<usize>),
    Mask(Var, Tensor),
    PickCols(Var, Vec<usize>),
    LogFloor(Var, f64),
}

impl Op {
    fn name(&self) -> &'static str {
        match self {
            Op::Leaf => "leaf",
            Op::MatMul(..) => "matmul",
            Op::Add(..) => "add",
            Op::AddRow(..) => "add_row",
            Op::Mul(..) => "mul",
            Op::MulCol(..) => "mul_col",
            Op::Scale(..) => "scale",
            Op::DivScalar(..) => "div_scalar",
            Op::ScaleBy(..) => "scale_by",
            Op::DivBy(..) => "div_by",
            Op::Recip(..) => "recip",
            Op::ConcatCols(..) => "concat_cols",
            Op::ConcatRows(..) => "concat_rows",
            Op::SliceCols(..) => "slice_cols",
            Op::Tanh(..) => "tanh",
            Op::Sigmoid(..) => "sigmoid",
            Op::SoftmaxRows(..) => "softmax_rows",
            Op::L2NormRows(..) => "l2_norm_rows",
            Op::Sum(..) => "sum",
            Op::GatherRows(..) => "gather_rows",
            Op::ScatterAddRows(..) => "scatter_add_rows",
            Op::Mask(..) => "mask",
            Op::PickCols(..) => "pick_cols",
            Op::LogFloor(..) => "log_floor",
        }
    }

    fn inputs(&self) -> Vec<Var> {
        match self {
            Op::Leaf => Vec::new(),
            Op::MatMul(a, b)
            | Op::Add(a, b)
            | Op::AddRow(a, b)
            | Op::Mul(a, b)
            | Op::MulCol(a, b)
            | Op::ScaleBy(a, b)
            | Op::DivBy(a, b) => vec![*a, *b],
            Op::ConcatCols(xs) | Op::ConcatRows(xs) => xs.clone(),
            Op::Scale(a, _)
            | Op::DivScalar(a, _)
            | Op::Recip(a)
            | Op::SliceCols(a, _)
            | Op::Tanh(a)
            | Op::Sigmoid(a)
            | Op::SoftmaxRows(a)
            | Op::L2NormRows(a)
            | Op::Sum(a)
            | Op::GatherRows(a, _)
            | Op::ScatterAddRows(a, _)
            | Op::Mask(a, _)
            | Op::PickCols(a, _)
            | Op::LogFloor(a, _) => vec![*a],
        }
    }
}

#[derive(Debug)]
struct Node {
    op: Op,
    value: Tensor,
    /// Accumulated gradient; only populated on trainable leaves.
    grad: Option<Tensor>,
    requires_grad: bool,
}

/// A single compute graph. Build one per forward pass.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Trainable leaf.
    pub fn param(&mut self, value: Tensor) -> Var {
        self.push_raw(Op::Leaf, value, true)
    }

    /// Non-trainable leaf.
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push_raw(Op::Leaf, value, false)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        self.nodes[v.0].value.shape()
    }

    /// Accumulated gradient of a trainable leaf, if `backward` reached it.
    pub fn grad(&self, v: Var) -> Option<&Tensor> {
        self.nodes[v.0].grad.as_ref()
    }

    pub fn is_trainable_leaf(&self, v: Var) -> bool {
        let node = &self.nodes[v.0];
        matches!(node.op, Op::Leaf) && node.requires_grad
    }

    pub fn zero_grad(&mut self) {
        for node in &mut self.nodes {
            node.grad = None;
        }
    }

    fn push_raw(&mut self, op: Op, value: Tensor, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            op,
            value,
            grad: None,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn push(&mut self, op: Op, value: Tensor) -> Var {
        let requires_grad = op.inputs().iter().any(|v| self.nodes[v.0].requires_grad);
        self.push_raw(op, value, requires_grad)
    }

    fn val(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    fn require_matrix(&self, op: &'static str, v: Var) -> Result<()> {
        if self.val(v).is_matrix() {
            Ok(())
        } else {
            Err(Error::dim(op, self.val(v).shape(), &[]))
        }
    }

    fn require_one(&self, op: &'static str, a: Var, s: Var) -> Result<()> {
        if self.val(s).len() == 1 {
            Ok(())
        } else {
            Err(Error::dim(op, self.val(a).shape(), self.val(s).shape()))
        }
    }

    fn zip_same(&self, op: &'static str, a: Var, b: Var, f: impl Fn(f64, f64) -> f64) -> Result<Tensor> {
        let (ta, tb) = (self.val(a), self.val(b));
        if !ta.same_shape(tb) {
            return Err(Error::dim(op, ta.shape(), tb.shape()));
        }
        let data = ta.data().iter().zip(tb.data()).map(|(&x, &y)| f(x, y)).collect();
        Tensor::new(ta.shape().to_vec(), data)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.val(a).matmul(self.val(b))?;
        Ok(self.push(Op::MatMul(a, b), value))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.zip_same("add", a, b, |x, y| x + y)?;
        Ok(self.push(Op::Add(a, b), value))
    }

    pub fn add_row(&mut self, a: Var, row: Var) -> Result<Var> {
        self.require_matrix("add_row", a)?;
        let (ta, tr) = (self.val(a), self.val(row));
        if tr.len() != ta.cols() {
            return Err(Error::dim("add_row", ta.shape(), tr.shape()));
        }
        let mut value = ta.clone();
        let c = ta.cols();
        for (i, v) in value.data_mut().iter_mut().enumerate() {
            *v += tr.data()[i % c];
        }
        Ok(self.push(Op::AddRow(a, row), value))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.zip_same("mul", a, b, |x, y| x * y)?;
        Ok(self.push(Op::Mul(a, b), value))
    }

    pub fn mul_col(&mut self, a: Var, col: Var) -> Result<Var> {
        self.require_matrix("mul_col", a)?;
        let (ta, tc) = (self.val(a), self.val(col));
        if tc.len() != ta.rows() {
            return Err(Error::dim("mul_col", ta.shape(), tc.shape()));
        }
        let mut value = ta.clone();
        let c = ta.cols();
        for (i, v) in value.data_mut().iter_mut().enumerate() {
            *v *= tc.data()[i / c];
        }
        Ok(self.push(Op::MulCol(a, col), value))
    }

    pub fn scale(&mut self, a: Var, s: f64) -> Var {
        let value = self.val(a).map(|x| x * s);
        self.push(Op::Scale(a, s), value)
    }

    pub fn div_scalar(&mut self, a: Var, s: f64) -> Var {
        let value = self.val(a).map(|x| x / s);
        self.push(Op::DivScalar(a, s), value)
    }

    pub fn scale_by(&mut self, a: Var, s: Var) -> Result<Var> {
        self.require_one("scale_by", a, s)?;
        let k = self.val(s).item();
        let value = self.val(a).map(|x| x * k);
        Ok(self.push(Op::ScaleBy(a, s), value))
    }

    pub fn div_by(&mut self, a: Var, s: Var) -> Result<Var> {
        self.require_one("div_by", a, s)?;
        let k = self.val(s).item();
        let value = self.val(a).map(|x| x / k);
        Ok(self.push(Op::DivBy(a, s), value))
    }

    pub fn recip(&mut self, a: Var) -> Var {
        let value = self.val(a).map(|x| 1.0 / x);
        self.push(Op::Recip(a), value)
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        let first = *parts
            .first()
            .ok_or_else(|| Error::Contract("concat_cols of nothing".into()))?;
        let rows = self.val(first).rows();
        for &p in parts {
            self.require_matrix("concat_cols", p)?;
            if self.val(p).rows() != rows {
                return Err(Error::dim("concat_cols", self.val(first).shape(), self.val(p).shape()));
            }
        }
        let total: usize = parts.iter().map(|&p| self.val(p).cols()).sum();
        let mut data = Vec::with_capacity(rows * total);
        for r in 0..rows {
            for &p in parts {
                data.extend_from_slice(self.val(p).row(r));
            }
        }
        let value = Tensor::matrix(rows, total, data)?;
        Ok(self.push(Op::ConcatCols(parts.to_vec()), value))
    }

    pub fn concat_rows(&mut self, parts: &[Var]) -> Result<Var> {
        let first = *parts
            .first()
            .ok_or_else(|| Error::Contract("concat_rows of nothing".into()))?;
        let cols = self.val(first).cols();
        for &p in parts {
            self.require_matrix("concat_rows", p)?;
            if self.val(p).cols() != cols {
                return Err(Error::dim("concat_rows", self.val(first).shape(), self.val(p).shape()));
            }
        }
        let rows: usize = parts.iter().map(|&p| self.val(p).rows()).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for &p in parts {
            data.extend_from_slice(self.val(p).data());
        }
        let value = Tensor::matrix(rows, cols, data)?;
        Ok(self.push(Op::ConcatRows(parts.to_vec()), value))
    }

    /// Columns `start..end`.
    pub fn slice_cols(&mut self, a: Var, start: usize, end: usize) -> Result<Var> {
        self.require_matrix("slice_cols", a)?;
        let ta = self.val(a);
        if start >= end || end > ta.cols() {
            return Err(Error::dim("slice_cols", ta.shape(), &[start, end]));
        }
        let rows = ta.rows();
        let mut data = Vec::with_capacity(rows * (end - start));
        for r in 0..rows {
            data.extend_from_slice(&ta.row(r)[start..end]);
        }
        let value = Tensor::matrix(rows, end - start, data)?;
        Ok(self.push(Op::SliceCols(a, start), value))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let value = self.val(a).map(f64::tanh);
        self.push(Op::Tanh(a), value)
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let value = self.val(a).map(sigmoid);
        self.push(Op::Sigmoid(a), value)
    }

    pub fn softmax_rows(&mut self, a: Var) -> Result<Var> {
        self.require_matrix("softmax_rows", a)?;
        let mut value = self.val(a).clone();
        for r in 0..value.rows() {
            softmax_in_place(value.row_mut(r));
        }
        Ok(self.push(Op::SoftmaxRows(a), value))
    }

    /// Euclidean norm of each row, as an `[n, 1]` column.
    pub fn l2_norm_rows(&mut self, a: Var) -> Result<Var> {
        self.require_matrix("l2_norm_rows", a)?;
        let ta = self.val(a);
        let data = (0..ta.rows())
            .map(|r| ta.row(r).iter().map(|x| x * x).sum::<f64>().sqrt())
            .collect();
        let value = Tensor::matrix(ta.rows(), 1, data)?;
        Ok(self.push(Op::L2NormRows(a), value))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let value = Tensor::scalar(self.val(a).data().iter().sum());
        self.push(Op::Sum(a), value)
    }

    pub fn gather_rows(&mut self, a: Var, index: &[usize]) -> Result<Var> {
        self.require_matrix("gather_rows", a)?;
        let ta = self.val(a);
        let c = ta.cols();
        let mut data = Vec::with_capacity(index.len() * c);
        for &i in index {
            if i >= ta.rows() {
                return Err(Error::dim("gather_rows", ta.shape(), &[i]));
            }
            data.extend_from_slice(ta.row(i));
        }
        let value = Tensor::matrix(index.len(), c, data)?;
        Ok(self.push(Op::GatherRows(a, index.to_vec()), value))
    }

    /// `out[index[k]] += a[k]` into `rows` zero-initialised rows.
    pub fn scatter_add_rows(&mut self, a: Var, index: &[usize], rows: usize) -> Result<Var> {
        self.require_matrix("scatter_add_rows", a)?;
        let ta = self.val(a);
        if index.len() != ta.rows() {
            return Err(Error::dim("scatter_add_rows", ta.shape(), &[index.len()]));
        }
        let mut value = Tensor::zeros(&[rows, ta.cols()]);
        for (k, &i) in index.iter().enumerate() {
            if i >= rows {
                return Err(Error::dim("scatter_add_rows", &[rows], &[i]));
            }
            for (o, x) in value.row_mut(i).iter_mut().zip(ta.row(k)) {
                *o += x;
            }
        }
        Ok(self.push(Op::ScatterAddRows(a, index.to_vec()), value))
    }

    /// Elementwise product with a constant mask (dropout).
    pub fn mask(&mut self, a: Var, mask: Tensor) -> Result<Var> {
        let ta = self.val(a);
        if !ta.same_shape(&mask) {
            return Err(Error::dim("mask", ta.shape(), mask.shape()));
        }
        let data = ta.data().iter().zip(mask.data()).map(|(x, m)| x * m).collect();
        let value = Tensor::new(ta.shape().to_vec(), data)?;
        Ok(self.push(Op::Mask(a, mask), value))
    }

    /// `out[i] = a[i, index[i]]`, as an `[n, 1]` column.
    pub fn pick_cols(&mut self, a: Var, index: &[usize]) -> Result<Var> {
        self.require_matrix("pick_cols", a)?;
        let ta = self.val(a);
        if index.len() != ta.rows() || index.iter().any(|&c| c >= ta.cols()) {
            return Err(Error::dim("pick_cols", ta.shape(), &[index.len()]));
        }
        let data = index.iter().enumerate().map(|(r, &c)| ta.get(r, c)).collect();
        let value = Tensor::matrix(index.len(), 1, data)?;
        Ok(self.push(Op::PickCols(a, index.to_vec()), value))
    }

    /// `ln(max(a, floor))`; the gradient is zero where the floor is active.
    /// `ln(max(x, floor))`; NaN inputs stay NaN so divergence is visible.
    pub fn log_floor(&mut self, a: Var, floor: f64) -> Var {
        let value = self.val(a).map(|x| if x.is_nan() { x } else { x.max(floor).ln() });
        self.push(Op::LogFloor(a, floor), value)
    }

    /// Back-propagates from a one-element node and accumulates into every
    /// trainable leaf it reaches. Calling it twice without `zero_grad`
    /// doubles the leaf gradients.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        if self.val(loss).len() != 1 {
            return Err(Error::Contract(format!(
                "backward needs a scalar loss, got shape {:?}",
                self.val(loss).shape()
            )));
        }
        let mut grads: Vec<Option<Tensor>> = (0..=loss.0).map(|_| None).collect();
        grads[loss.0] = Some(Tensor::filled(self.val(loss).shape(), 1.0));

        for idx in (0..=loss.0).rev() {
            if !self.nodes[idx].requires_grad {
                continue;
            }
            let Some(g) = grads[idx].take() else { continue };
            if matches!(self.nodes[idx].op, Op::Leaf) {
                let node = &mut self.nodes[idx];
                match &mut node.grad {
                    Some(acc) => acc.add_assign(&g),
                    None => node.grad = Some(g),
                }
                continue;
            }
            for (input, local) in self.local_grads(idx, &g) {
                if !self.nodes[input.0].requires_grad {
                    continue;
                }
                match &mut grads[input.0] {
                    Some(acc) => acc.add_assign(&local),
                    slot @ None => *slot = Some(local),
                }
            }
        }
        Ok(())
    }

    fn wants(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    /// Vector-Jacobian products of node `idx` for each input that needs one.
    fn local_grads(&self, idx: usize, g: &Tensor) -> Vec<(Var, Tensor)> {
        let node = &self.nodes[idx];
        let y = &node.value;
        let mut out = Vec::new();
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                if self.wants(*a) {
                    out.push((*a, g.matmul_t(self.val(*b))));
                }
                if self.wants(*b) {
                    out.push((*b, self.val(*a).t_matmul(g)));
                }
            }
            Op::Add(a, b) => {
                out.push((*a, g.clone()));
                out.push((*b, g.clone()));
            }
            Op::AddRow(a, row) => {
                out.push((*a, g.clone()));
                if self.wants(*row) {
                    let c = g.cols();
                    let mut acc = vec![0.0; c];
                    for (i, v) in g.data().iter().enumerate() {
                        acc[i % c] += v;
                    }
                    let shape = self.val(*row).shape().to_vec();
                    out.push((*row, Tensor::new(shape, acc).expect("row shape")));
                }
            }
            Op::Mul(a, b) => {
                if self.wants(*a) {
                    out.push((*a, zip(g, self.val(*b), |x, y| x * y)));
                }
                if self.wants(*b) {
                    out.push((*b, zip(g, self.val(*a), |x, y| x * y)));
                }
            }
            Op::MulCol(a, col) => {
                let c = g.cols();
                let colv = self.val(*col);
                if self.wants(*a) {
                    let mut ga = g.clone();
                    for (i, v) in ga.data_mut().iter_mut().enumerate() {
                        *v *= colv.data()[i / c];
                    }
                    out.push((*a, ga));
                }
                if self.wants(*col) {
                    let av = self.val(*a);
                    let mut acc = vec![0.0; colv.len()];
                    for (i, (gv, x)) in g.data().iter().zip(av.data()).enumerate() {
                        acc[i / c] += gv * x;
                    }
                    let shape = colv.shape().to_vec();
                    out.push((*col, Tensor::new(shape, acc).expect("col shape")));
                }
            }
            Op::Scale(a, s) => out.push((*a, g.map(|x| x * s))),
            Op::DivScalar(a, s) => out.push((*a, g.map(|x| x / s))),
            Op::ScaleBy(a, s) => {
                let k = self.val(*s).item();
                if self.wants(*a) {
                    out.push((*a, g.map(|x| x * k)));
                }
                if self.wants(*s) {
                    let d: f64 = g.data().iter().zip(self.val(*a).data()).map(|(x, y)| x * y).sum();
                    out.push((*s, Tensor::filled(self.val(*s).shape(), d)));
                }
            }
            Op::DivBy(a, s) => {
                let k = self.val(*s).item();
                if self.wants(*a) {
                    out.push((*a, g.map(|x| x / k)));
                }
                if self.wants(*s) {
                    let d: f64 = g.data().iter().zip(self.val(*a).data()).map(|(x, y)| x * y).sum();
                    out.push((*s, Tensor::filled(self.val(*s).shape(), -d / (k * k))));
                }
            }
            Op::Recip(a) => out.push((*a, zip(g, y, |gv, yv| -gv * yv * yv))),
            Op::ConcatCols(parts) => {
                let mut offset = 0;
                for &p in parts {
                    let width = self.val(p).cols();
                    if self.wants(p) {
                        let mut data = Vec::with_capacity(g.rows() * width);
                        for r in 0..g.rows() {
                            data.extend_from_slice(&g.row(r)[offset..offset + width]);
                        }
                        out.push((p, Tensor::matrix(g.rows(), width, data).expect("slice")));
                    }
                    offset += width;
                }
            }
            Op::ConcatRows(parts) => {
                let mut offset = 0;
                let c = g.cols();
                for &p in parts {
                    let rows = self.val(p).rows();
                    if self.wants(p) {
                        let data = g.data()[offset * c..(offset + rows) * c].to_vec();
                        out.push((p, Tensor::matrix(rows, c, data).expect("slice")));
                    }
                    offset += rows;
                }
            }
            Op::SliceCols(a, start) => {
                let mut ga = Tensor::zeros(self.val(*a).shape());
                let width = g.cols();
                for r in 0..g.rows() {
                    ga.row_mut(r)[*start..*start + width].copy_from_slice(g.row(r));
                }
                out.push((*a, ga));
            }
            Op::Tanh(a) => out.push((*a, zip(g, y, |gv, yv| gv * (1.0 - yv * yv)))),
            Op::Sigmoid(a) => out.push((*a, zip(g, y, |gv, yv| gv * yv * (1.0 - yv)))),
            Op::SoftmaxRows(a) => {
                let mut ga = g.clone();
                for r in 0..y.rows() {
                    let yr = y.row(r);
                    let dot: f64 = g.row(r).iter().zip(yr).map(|(a, b)| a * b).sum();
                    for (v, &yv) in ga.row_mut(r).iter_mut().zip(yr) {
                        *v = yv * (*v - dot);
                    }
                }
                out.push((*a, ga));
            }
            Op::L2NormRows(a) => {
                let av = self.val(*a);
                let mut ga = Tensor::zeros(av.shape());
                for r in 0..av.rows() {
                    let norm = y.data()[r];
                    if norm == 0.0 {
                        continue;
                    }
                    let k = g.data()[r] / norm;
                    for (o, x) in ga.row_mut(r).iter_mut().zip(av.row(r)) {
                        *o = k * x;
                    }
                }
                out.push((*a, ga));
            }
            Op::Sum(a) => out.push((*a, Tensor::filled(self.val(*a).shape(), g.item()))),
            Op::GatherRows(a, index) => {
                let mut ga = Tensor::zeros(self.val(*a).shape());
                for (k, &i) in index.iter().enumerate() {
                    for (o, x) in ga.row_mut(i).iter_mut().zip(g.row(k)) {
                        *o += x;
                    }
                }
                out.push((*a, ga));
            }
            Op::ScatterAddRows(a, index) => {
                let c = g.cols();
                let mut data = Vec::with_capacity(index.len() * c);
                for &i in index {
                    data.extend_from_slice(g.row(i));
                }
                out.push((*a, Tensor::matrix(index.len(), c, data).expect("gather")));
            }
            Op::Mask(a, mask) => out.push((*a, zip(g, mask, |x, m| x * m))),
            Op::PickCols(a, index) => {
                let mut ga = Tensor::zeros(self.val(*a).shape());
                for (r, &c) in index.iter().enumerate() {
                    ga.set(r, c, g.data()[r]);
                }
                out.push((*a, ga));
            }
            Op::LogFloor(a, floor) => {
                out.push((*a, zip(g, self.val(*a), |gv, x| if x > *floor { gv / x } else { 0.0 })))
            }
        }
        out
    }

    /// Op tag of a node, for diagnostics.
    pub fn op_name(&self, v: Var) -> &'static str {
        self.nodes[v.0].op.name()
    }
}

fn zip(a: &Tensor, b: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
    let data = a.data().iter().zip(b.data()).map(|(&x, &y)| f(x, y)).collect();
    Tensor::new(a.shape().to_vec(), data).expect("same shape")
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Max-shifted softmax over one row.
pub fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        total += *v;
    }
    for v in row.iter_mut() {
        *v /= total;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(values: &[f64]) -> Tensor {
        Tensor::from_rows(&[values.to_vec()])
    }

    #[test]
    fn softmax_of_zeros_is_uniform() {
        let mut tape = Tape::new();
        let x = tape.constant(row(&[0.0, 0.0, 0.0]));
        let y = tape.softmax_rows(x).unwrap();
        for &v in tape.value(y).data() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn concat_shape() {
        let mut tape = Tape::new();
        let a = tape.constant(Tensor::zeros(&[2, 3]));
        let b = tape.constant(Tensor::zeros(&[2, 2]));
        let c = tape.concat_cols(&[a, b]).unwrap();
        assert_eq!(tape.shape(c), &[2, 5]);
    }

    #[test]
    fn shape_errors_name_the_op() {
        let mut tape = Tape::new();
        let a = tape.constant(Tensor::zeros(&[2, 3]));
        let b = tape.constant(Tensor::zeros(&[2, 3]));
        let err = tape.matmul(a, b).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("matmul") && msg.contains("[2, 3]"), "{msg}");
        let c = tape.constant(Tensor::zeros(&[3, 2]));
        assert!(tape.add(a, c).unwrap_err().to_string().contains("add"));
    }

    #[test]
    fn square_sum_gradient() {
        let mut tape = Tape::new();
        let x = tape.param(row(&[1.0, 2.0, 3.0]));
        let sq = tape.mul(x, x).unwrap();
        let loss = tape.sum(sq);
        tape.backward(loss).unwrap();
        assert_eq!(tape.grad(x).unwrap().data(), &[2.0, 4.0, 6.0]);
    }

    #[test]
    fn softmax_sum_has_zero_gradient() {
        let mut tape = Tape::new();
        let x = tape.param(row(&[0.3, -1.2, 2.0, 0.0]));
        let y = tape.softmax_rows(x).unwrap();
        let loss = tape.sum(y);
        tape.backward(loss).unwrap();
        for &g in tape.grad(x).unwrap().data() {
            assert!(g.abs() < 1e-12);
        }
    }

    #[test]
    fn non_scalar_loss_is_rejected() {
        let mut tape = Tape::new();
        let x = tape.param(row(&[1.0, 2.0]));
        assert!(matches!(tape.backward(x), Err(Error::Contract(_))));
    }

    #[test]
    fn second_backward_doubles_gradient() {
        let mut tape = Tape::new();
        let w = tape.param(Tensor::from_rows(&[vec![0.5, -0.2], vec![0.1, 0.7]]));
        let x = tape.constant(Tensor::from_rows(&[vec![1.0, 2.0]]));
        let h = tape.matmul(x, w).unwrap();
        let t = tape.tanh(h);
        let loss = tape.sum(t);
        tape.backward(loss).unwrap();
        let once = tape.grad(w).unwrap().clone();
        tape.backward(loss).unwrap();
        let twice = tape.grad(w).unwrap();
        for (a, b) in once.data().iter().zip(twice.data()) {
            assert_eq!(2.0 * a, *b);
        }
        tape.zero_grad();
        assert!(tape.grad(w).is_none());
    }

    #[test]
    fn constants_receive_no_gradient() {
        let mut tape = Tape::new();
        let c = tape.constant(row(&[1.0, 2.0]));
        let p = tape.param(row(&[3.0, 4.0]));
        let m = tape.mul(c, p).unwrap();
        let loss = tape.sum(m);
        tape.backward(loss).unwrap();
        assert!(tape.grad(c).is_none());
        assert_eq!(tape.grad(p).unwrap().data(), &[1.0, 2.0]);
        assert!(tape.is_trainable_leaf(p) && !tape.is_trainable_leaf(c));
    }

    #[test]
    fn log_floor_guards_zero() {
        let mut tape = Tape::new();
        let x = tape.param(row(&[0.0, 1.0]));
        let y = tape.log_floor(x, 1e-12);
        assert_eq!(tape.value(y).data()[0], 1e-12f64.ln());
        let nan = tape.constant(row(&[f64::NAN]));
        let nan_log = tape.log_floor(nan, 1e-12);
        assert!(tape.value(nan_log).data()[0].is_nan());
        let loss = tape.sum(y);
        tape.backward(loss).unwrap();
        assert_eq!(tape.grad(x).unwrap().data(), &[0.0, 1.0]);
    }
}
