use super::{propagate, TypedGraph};
use crate::error::Result;
use crate::numerics::{Tape, Var};

#[derive(Clone, Debug)]
pub struct WordVars {
    /// Word-type table `[|A|, d_w]`.
    pub types: Var,
    /// One `[d + d_w, d + d_w]` transform per layer.
    pub layers: Vec<Var>,
}

#[derive(Clone, Copy, Debug)]
pub struct WordOutput {
    /// Node part of the last layer, `[n, d]`.
    pub nodes: Var,
    /// Type part of the last layer, `[n, d_w]`.
    pub types: Var,
    pub initial_types: Var,
}

/// Propagates `[H || A]` with uniform `1/deg` weights and splits the result
/// back into node and type parts.
pub fn word_channel_forward(tape: &mut Tape, h0: Var, graph: &TypedGraph, vars: &WordVars) -> Result<WordOutput> {
    let d = tape.value(h0).cols();
    let initial_types = tape.gather_rows(vars.types, &graph.node_types)?;
    let mut x = tape.concat_cols(&[h0, initial_types])?;
    let width = tape.value(x).cols();
    let weights = tape.constant(graph.uniform_weights());
    for &w in &vars.layers {
        let agg = propagate(tape, x, graph, weights)?;
        let lin = tape.matmul(agg, w)?;
        x = tape.tanh(lin);
    }
    Ok(WordOutput {
        nodes: tape.slice_cols(x, 0, d)?,
        types: tape.slice_cols(x, d, width)?,
        initial_types,
    })
}

/// Untyped GCN over the same edges: no relation or word types.
pub fn homogeneous_forward(tape: &mut Tape, h0: Var, graph: &TypedGraph, layers: &[Var]) -> Result<Var> {
    let weights = tape.constant(graph.uniform_weights());
    let mut h = h0;
    for &w in layers {
        let agg = propagate(tape, h, graph, weights)?;
        let lin = tape.matmul(agg, w)?;
        h = tape.tanh(lin);
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::TypedEdge;
    use crate::numerics::Tensor;

    #[test]
    fn two_node_trace() {
        // arc 0 -> 1, reverse, self-loops; node 0 has type 1, node 1 type 0
        let graph = TypedGraph {
            n: 2,
            edges: vec![
                TypedEdge { src: 0, dst: 1, relation: 0 },
                TypedEdge { src: 1, dst: 0, relation: 1 },
                TypedEdge { src: 0, dst: 0, relation: 2 },
                TypedEdge { src: 1, dst: 1, relation: 2 },
            ],
            node_types: vec![1, 0],
        };
        let h0 = [[0.5, -1.0], [1.5, 0.25]];
        let a = [[0.3, -0.7], [0.9, 0.1]];
        let w1 = [
            [0.2, -0.1, 0.4, 0.3],
            [0.5, 0.6, -0.2, 0.1],
            [-0.3, 0.2, 0.7, -0.4],
            [0.1, -0.5, 0.3, 0.8],
        ];

        // Each node has in-degree 2, so aggregation is the mean of both rows.
        let x0: Vec<[f64; 4]> = (0..2)
            .map(|i| {
                let t = a[[1, 0][i]];
                [h0[i][0], h0[i][1], t[0], t[1]]
            })
            .collect();
        let mean: [f64; 4] = std::array::from_fn(|c| x0[0][c] * 0.5 + x0[1][c] * 0.5);
        let out: [f64; 4] = std::array::from_fn(|c| (0..4).map(|q| mean[q] * w1[q][c]).sum::<f64>().tanh());

        let m = |rows: &[[f64; 2]]| Tensor::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>());
        let mut tape = Tape::new();
        let hv = tape.constant(m(&h0));
        let vars = WordVars {
            types: tape.param(m(&a)),
            layers: vec![tape.param(Tensor::from_rows(&w1.iter().map(|r| r.to_vec()).collect::<Vec<_>>()))],
        };
        let o = word_channel_forward(&mut tape, hv, &graph, &vars).unwrap();
        assert_eq!(tape.shape(o.nodes), &[2, 2]);
        assert_eq!(tape.shape(o.types), &[2, 2]);
        for i in 0..2 {
            for c in 0..2 {
                assert!((tape.value(o.nodes).get(i, c) - out[c]).abs() < 1e-12);
                assert!((tape.value(o.types).get(i, c) - out[2 + c]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn same_pos_same_initial_types() {
        let graph = TypedGraph {
            n: 3,
            edges: (0..3).map(|i| TypedEdge { src: i, dst: i, relation: 0 }).collect(),
            node_types: vec![0, 1, 0],
        };
        let mut tape = Tape::new();
        let h = tape.constant(Tensor::zeros(&[3, 2]));
        let vars = WordVars {
            types: tape.param(Tensor::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]])),
            layers: vec![tape.param(Tensor::identity(4))],
        };
        let o = word_channel_forward(&mut tape, h, &graph, &vars).unwrap();
        let a0 = tape.value(o.initial_types);
        assert_eq!(a0.row(0), a0.row(2));
        assert_ne!(a0.row(0), a0.row(1));
    }
}
