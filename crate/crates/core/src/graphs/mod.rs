//! Per-sentence typed graphs and the three message-passing channels.
//!
//! All channels share the propagation step `h_i <- tanh(W · Σ_j w_ji h_j)`
//! over incoming edges, and differ in how the edge weights `w_ji` are
//! obtained: learned from relation-type vectors, uniform `1/deg(i)`, or
//! row-normalised cosine similarity.

mod relation;
mod semantic;
mod word;

pub use relation::{relation_channel_forward, RelationOutput, RelationVars};
pub use semantic::{semantic_adjacency, semantic_channel_forward};
pub use word::{homogeneous_forward, word_channel_forward, WordOutput, WordVars};

use crate::corpus::{ParsedSentence, RelationType, TypeInventories};
use crate::error::Result;
use crate::numerics::{Tape, Tensor, Var};

/// Directed edge carrying messages from `src` to `dst`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TypedEdge {
    pub src: usize,
    pub dst: usize,
    pub relation: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TypedGraph {
    pub n: usize,
    /// Raw arcs, then their inverse-typed reverses, then one self-loop per node.
    pub edges: Vec<TypedEdge>,
    pub node_types: Vec<usize>,
}

impl TypedGraph {
    pub fn sources(&self) -> Vec<usize> {
        self.edges.iter().map(|e| e.src).collect()
    }

    pub fn targets(&self) -> Vec<usize> {
        self.edges.iter().map(|e| e.dst).collect()
    }

    pub fn relations(&self) -> Vec<usize> {
        self.edges.iter().map(|e| e.relation).collect()
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for e in &self.edges {
            deg[e.dst] += 1;
        }
        deg
    }

    /// `1/deg(dst)` per edge, as an `[m, 1]` column.
    pub fn uniform_weights(&self) -> Tensor {
        let deg = self.in_degrees();
        let w = self.edges.iter().map(|e| 1.0 / deg[e.dst] as f64).collect();
        Tensor::matrix(self.edges.len(), 1, w).expect("column")
    }

    /// Applies a node permutation: node `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> TypedGraph {
        let mut node_types = vec![0; self.n];
        for (i, &t) in self.node_types.iter().enumerate() {
            node_types[perm[i]] = t;
        }
        TypedGraph {
            n: self.n,
            edges: self
                .edges
                .iter()
                .map(|e| TypedEdge {
                    src: perm[e.src],
                    dst: perm[e.dst],
                    relation: e.relation,
                })
                .collect(),
            node_types,
        }
    }
}

pub fn build_syntactic_graph(sentence: &ParsedSentence, inventories: &TypeInventories) -> Result<TypedGraph> {
    let n = sentence.len();
    let node_types = sentence
        .pos_tags
        .iter()
        .map(|p| inventories.word_type_index(p))
        .collect::<Result<Vec<_>>>()?;
    let mut edges = Vec::with_capacity(2 * sentence.arcs.len() + n);
    for arc in &sentence.arcs {
        edges.push(TypedEdge {
            src: arc.head,
            dst: arc.dependent,
            relation: inventories.relation_index(&RelationType::Base(arc.relation.clone()))?,
        });
    }
    for arc in &sentence.arcs {
        edges.push(TypedEdge {
            src: arc.dependent,
            dst: arc.head,
            relation: inventories.relation_index(&RelationType::Inverse(arc.relation.clone()))?,
        });
    }
    let self_loop = inventories.relation_index(&RelationType::SelfLoop)?;
    edges.extend((0..n).map(|i| TypedEdge {
        src: i,
        dst: i,
        relation: self_loop,
    }));
    Ok(TypedGraph { n, edges, node_types })
}

/// `out[dst] += weight[e] * x[src]` over all edges; `weights` is `[m, 1]`.
pub(crate) fn propagate(tape: &mut Tape, x: Var, graph: &TypedGraph, weights: Var) -> Result<Var> {
    let gathered = tape.gather_rows(x, &graph.sources())?;
    let messages = tape.mul_col(gathered, weights)?;
    tape.scatter_add_rows(messages, &graph.targets(), graph.n)
}
