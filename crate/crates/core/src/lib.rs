//! Multi-channel, type-aware graph neural network for event trigger
//! detection over dependency-parsed sentences.
//!
//! The pipeline is: token embeddings, a bidirectional LSTM, three graph
//! channels (relation-typed edges, POS-typed nodes, and a cosine-similarity
//! graph rebuilt every forward pass), a normalised weighted fusion, and a
//! per-token softmax classifier trained with summed negative log-likelihood.

pub mod cli;
pub mod corpus;
pub mod detector;
pub mod encoder;
pub mod error;
pub mod graphs;
pub mod model;
pub mod numerics;
pub mod seed;
pub mod training;

pub use error::{Error, Result};
