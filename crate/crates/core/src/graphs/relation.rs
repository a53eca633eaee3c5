use super::{propagate, TypedGraph};
use crate::error::Result;
use crate::numerics::{Tape, Var};

/// Tape handles for the relation-type-aware channel.
#[derive(Clone, Debug)]
pub struct RelationVars {
    /// Relation-type table `[|R|, d_r]`.
    pub types: Var,
    /// Edge update `[2·d + d_r, d_r]`, shared across layers.
    pub edge_update: Var,
    /// Edge scoring vector `[d_r, 1]`.
    pub score: Var,
    /// Node transforms, one `[d, d]` per layer.
    pub layers: Vec<Var>,
}

#[derive(Clone, Copy, Debug)]
pub struct RelationOutput {
    pub nodes: Var,
    /// Final edge representations `[m, d_r]`.
    pub edges: Var,
    /// Initial edge representations gathered from the type table.
    pub initial_edges: Var,
}

/// Per layer: score each edge with `sigmoid(u · E)`, normalise scores over
/// each node's incoming edges, aggregate neighbours and transform with
/// `tanh(W ·)`, then refresh edges as `W_r [E || h_src || h_dst]`.
pub fn relation_channel_forward(tape: &mut Tape, h0: Var, graph: &TypedGraph, vars: &RelationVars) -> Result<RelationOutput> {
    let src = graph.sources();
    let dst = graph.targets();
    let initial_edges = tape.gather_rows(vars.types, &graph.relations())?;
    let mut edges = initial_edges;
    let mut h = h0;
    for &w in &vars.layers {
        let logits = tape.matmul(edges, vars.score)?;
        let scores = tape.sigmoid(logits);
        let totals = tape.scatter_add_rows(scores, &dst, graph.n)?;
        let inv_totals = tape.recip(totals);
        let per_edge = tape.gather_rows(inv_totals, &dst)?;
        let weights = tape.mul(scores, per_edge)?;
        let agg = propagate(tape, h, graph, weights)?;
        let lin = tape.matmul(agg, w)?;
        h = tape.tanh(lin);

        let h_src = tape.gather_rows(h, &src)?;
        let h_dst = tape.gather_rows(h, &dst)?;
        let joined = tape.concat_cols(&[edges, h_src, h_dst])?;
        edges = tape.matmul(joined, vars.edge_update)?;
    }
    Ok(RelationOutput {
        nodes: h,
        edges,
        initial_edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::TypedEdge;
    use crate::numerics::Tensor;

    /// Two nodes, arc 0 -> 1 of type 0, its reverse of type 1, self-loops of type 2.
    fn two_node_graph() -> TypedGraph {
        TypedGraph {
            n: 2,
            edges: vec![
                TypedEdge { src: 0, dst: 1, relation: 0 },
                TypedEdge { src: 1, dst: 0, relation: 1 },
                TypedEdge { src: 0, dst: 0, relation: 2 },
                TypedEdge { src: 1, dst: 1, relation: 2 },
            ],
            node_types: vec![0, 0],
        }
    }

    fn sig(x: f64) -> f64 {
        1.0 / (1.0 + (-x).exp())
    }

    #[test]
    fn two_node_trace() {
        let h0 = [[0.5, -1.0], [1.5, 0.25]];
        let r = [[0.2, -0.4], [0.7, 0.1], [-0.3, 0.6]];
        let u = [0.8, -0.5];
        let w1 = [[0.9, -0.2], [0.3, 0.4]];
        let w2 = [[-0.6, 0.5], [0.1, 0.7]];
        // rows of W_r: [E(2) | h_src(2) | h_dst(2)]
        let wr = [[0.1, 0.2], [-0.3, 0.4], [0.5, -0.1], [0.2, 0.2], [-0.4, 0.3], [0.6, -0.5]];

        // Independent scalar trace of the same recurrence.
        let edges = [(0usize, 1usize, 0usize), (1, 0, 1), (0, 0, 2), (1, 1, 2)];
        let mut e: Vec<[f64; 2]> = edges.iter().map(|&(_, _, t)| r[t]).collect();
        let mut h = h0;
        for w in [w1, w2] {
            let s: Vec<f64> = e.iter().map(|v| sig(u[0] * v[0] + u[1] * v[1])).collect();
            let mut tot = [0.0; 2];
            for (k, &(_, d, _)) in edges.iter().enumerate() {
                tot[d] += s[k];
            }
            let mut agg = [[0.0; 2]; 2];
            for (k, &(sr, d, _)) in edges.iter().enumerate() {
                for c in 0..2 {
                    agg[d][c] += s[k] * (1.0 / tot[d]) * h[sr][c];
                }
            }
            let mut next = [[0.0; 2]; 2];
            for i in 0..2 {
                for c in 0..2 {
                    next[i][c] = (agg[i][0] * w[0][c] + agg[i][1] * w[1][c]).tanh();
                }
            }
            h = next;
            for (k, &(sr, d, _)) in edges.iter().enumerate() {
                let x = [e[k][0], e[k][1], h[sr][0], h[sr][1], h[d][0], h[d][1]];
                let mut out = [0.0; 2];
                for c in 0..2 {
                    out[c] = (0..6).map(|q| x[q] * wr[q][c]).sum();
                }
                e[k] = out;
            }
        }

        let m = |rows: &[[f64; 2]]| Tensor::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>());
        let mut tape = Tape::new();
        let hv = tape.constant(m(&h0));
        let vars = RelationVars {
            types: tape.param(m(&r)),
            edge_update: tape.param(m(&wr)),
            score: tape.param(Tensor::from_rows(&[vec![u[0]], vec![u[1]]])),
            layers: vec![tape.param(m(&w1)), tape.param(m(&w2))],
        };
        let out = relation_channel_forward(&mut tape, hv, &two_node_graph(), &vars).unwrap();
        for i in 0..2 {
            for c in 0..2 {
                assert!((tape.value(out.nodes).get(i, c) - h[i][c]).abs() < 1e-12);
            }
        }
        for k in 0..4 {
            for c in 0..2 {
                assert!((tape.value(out.edges).get(k, c) - e[k][c]).abs() < 1e-12);
            }
        }
        // same-type self-loops share their initial rows exactly
        assert_eq!(tape.value(out.initial_edges).row(2), tape.value(out.initial_edges).row(3));
    }
}
