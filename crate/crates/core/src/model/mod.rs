//! Parameter store and the end-to-end forward pass.

mod checkpoint;

pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_MAGIC};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{
    build_type_inventories, build_vocab, ParsedSentence, TypeInventories, Vocabulary, NONE_LABEL,
};
use crate::detector::{argmax_rows, classify, fuse, nll_loss};
use crate::encoder::{encode, EncoderVars, LstmVars};
use crate::error::{Error, Result};
use crate::graphs::{
    build_syntactic_graph, homogeneous_forward, relation_channel_forward, semantic_channel_forward,
    word_channel_forward, RelationVars, TypedGraph, WordVars,
};
use crate::numerics::{finite_difference_check, Coordinates, GradCheckReport, Tape, Tensor, Var};
use crate::seed;
use crate::training::Hyperparameters;

pub const EMBEDDINGS: &str = "embeddings";
pub const RELATION_TYPES: &str = "relation.types";
pub const RELATION_EDGE_UPDATE: &str = "relation.edge_update";
pub const RELATION_SCORE: &str = "relation.score";
pub const WORD_TYPES: &str = "word.types";
pub const FUSION_LAMBDA: &str = "fusion.lambda";
pub const CLASSIFIER_WEIGHT: &str = "classifier.weight";
pub const CLASSIFIER_BIAS: &str = "classifier.bias";

fn layer_name(prefix: &str, l: usize) -> String {
    format!("{prefix}.layer.{l}")
}

#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub name: String,
    pub value: Tensor,
}

/// Named tensors in a fixed order.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ParamStore {
    params: Vec<Param>,
}

impl ParamStore {
    pub fn push(&mut self, name: impl Into<String>, value: Tensor) {
        self.params.push(Param {
            name: name.into(),
            value,
        });
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Param> {
        self.params.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut Param> {
        self.params.iter_mut()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p.name == name)
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.params.iter().find(|p| p.name == name).map(|p| &p.value)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.params.iter_mut().find(|p| p.name == name).map(|p| &mut p.value)
    }

    pub fn names(&self) -> Vec<&str> {
        self.params.iter().map(|p| p.name.as_str()).collect()
    }

    pub fn at(&self, i: usize) -> &Param {
        &self.params[i]
    }

    pub fn total_size(&self) -> usize {
        self.params.iter().map(|p| p.value.len()).sum()
    }
}

/// A sentence resolved against the model's vocabulary, inventories and labels.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedSentence {
    pub tokens: Vec<usize>,
    pub graph: TypedGraph,
    pub gold: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub labels: Vec<String>,
    pub class_indices: Vec<usize>,
    /// `[n, classes]` per-token distributions.
    pub probabilities: Tensor,
}

/// Everything one forward pass produced that callers may want.
#[derive(Clone, Copy, Debug)]
pub struct ForwardOutput {
    pub probs: Var,
    pub h0: Var,
    pub relation_types: Option<Var>,
}

/// Per-forward options.
#[derive(Default)]
pub struct ForwardMode<'a> {
    /// Dropout stream; `None` means evaluation mode.
    pub dropout: Option<&'a mut ChaCha8Rng>,
    /// Fixed semantic adjacency instead of rebuilding it from `H⁰`.
    pub semantic_snapshot: Option<&'a Tensor>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub hyper: Hyperparameters,
    pub vocab: Vocabulary,
    pub inventories: TypeInventories,
    /// Class labels; index 0 is always `NONE`.
    pub labels: Vec<String>,
    pub params: ParamStore,
}

/// Deterministic label order: `NONE`, then the rest sorted.
pub fn label_set<'a>(labels: impl IntoIterator<Item = &'a str>) -> Vec<String> {
    let mut rest: Vec<String> = labels
        .into_iter()
        .filter(|l| *l != NONE_LABEL)
        .map(str::to_string)
        .collect();
    rest.sort();
    rest.dedup();
    std::iter::once(NONE_LABEL.to_string()).chain(rest).collect()
}

impl Model {
    /// Fresh model with Gaussian-initialised parameters drawn from the
    /// `init` stream of `hyper.seed`.
    pub fn new(
        hyper: Hyperparameters,
        vocab: Vocabulary,
        inventories: TypeInventories,
        labels: Vec<String>,
        embeddings: Option<Tensor>,
    ) -> Result<Self> {
        hyper.validate()?;
        if labels.first().map(String::as_str) != Some(NONE_LABEL) {
            return Err(Error::Config("label set must start with NONE".into()));
        }
        let mut rng = seed::rng(hyper.seed, seed::INIT);
        let std = hyper.init_std;
        let (d, h, dr, dw, dword) = (hyper.d_model, hyper.hidden(), hyper.d_r, hyper.d_w, hyper.d_word);
        let mut p = ParamStore::default();
        let mut randn = |shape: &[usize]| Tensor::randn(shape, std, &mut rng);

        let table = match embeddings {
            Some(t) => {
                if t.shape() != [vocab.len(), dword] {
                    return Err(Error::dim("embeddings", t.shape(), &[vocab.len(), dword]));
                }
                t
            }
            None => randn(&[vocab.len(), dword]),
        };
        p.push(EMBEDDINGS, table);
        for dir in ["forward", "backward"] {
            p.push(format!("encoder.{dir}.w_ih"), randn(&[dword, 4 * h]));
            p.push(format!("encoder.{dir}.w_hh"), randn(&[h, 4 * h]));
            p.push(format!("encoder.{dir}.bias"), randn(&[1, 4 * h]));
        }
        p.push(RELATION_TYPES, randn(&[inventories.relation_type_count(), dr]));
        p.push(RELATION_EDGE_UPDATE, randn(&[2 * d + dr, dr]));
        p.push(RELATION_SCORE, randn(&[dr, 1]));
        for l in 0..hyper.layers {
            p.push(layer_name("relation", l), randn(&[d, d]));
        }
        p.push(WORD_TYPES, randn(&[inventories.word_type_count(), dw]));
        for l in 0..hyper.layers {
            p.push(layer_name("word", l), randn(&[d + dw, d + dw]));
        }
        for l in 0..hyper.layers {
            p.push(layer_name("semantic", l), randn(&[d, d]));
        }
        if hyper.homogeneous {
            for l in 0..hyper.layers {
                p.push(layer_name("homogeneous", l), randn(&[d, d]));
            }
        }
        p.push(FUSION_LAMBDA, hyper.fusion().as_tensor());
        p.push(CLASSIFIER_WEIGHT, randn(&[d, labels.len()]));
        p.push(CLASSIFIER_BIAS, randn(&[1, labels.len()]));

        Ok(Model {
            hyper,
            vocab,
            inventories,
            labels,
            params: p,
        })
    }

    /// Vocabulary from `train`, type inventories and labels from `all`
    /// (POS tags and arcs are parser output, available for every split).
    pub fn for_corpus(
        hyper: Hyperparameters,
        train: &[ParsedSentence],
        all: &[ParsedSentence],
        embeddings_text: Option<&str>,
    ) -> Result<Self> {
        let vocab = build_vocab(train, hyper.min_count)?;
        let inventories = build_type_inventories(all)?;
        let labels = label_set(all.iter().flat_map(|s| s.labels.iter().map(String::as_str)));
        let embeddings = embeddings_text
            .map(|text| crate::corpus::load_pretrained_embeddings(text, &vocab, hyper.d_word, hyper.seed))
            .transpose()?;
        Model::new(hyper, vocab, inventories, labels, embeddings)
    }

    pub fn class_count(&self) -> usize {
        self.labels.len()
    }

    pub fn label_index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn encode_sentence(&self, s: &ParsedSentence, with_gold: bool) -> Result<EncodedSentence> {
        s.validate()?;
        let gold = if with_gold {
            Some(s.labels.iter().map(|l| self.label_index(l)).collect::<Result<Vec<_>>>()?)
        } else {
            None
        };
        Ok(EncodedSentence {
            tokens: self.vocab.encode(s),
            graph: build_syntactic_graph(s, &self.inventories)?,
            gold,
        })
    }

    pub fn encode_all(&self, sentences: &[ParsedSentence]) -> Result<Vec<EncodedSentence>> {
        sentences.iter().map(|s| self.encode_sentence(s, true)).collect()
    }

    /// Whether parameter `name` receives updates under the current settings.
    pub fn is_trainable(&self, name: &str) -> bool {
        match name {
            RELATION_TYPES => !self.hyper.freeze_relation_types,
            WORD_TYPES => !self.hyper.freeze_word_types,
            FUSION_LAMBDA => self.hyper.learnable_lambda,
            _ => true,
        }
    }

    pub fn trainable_names(&self) -> Vec<&str> {
        self.params.names().into_iter().filter(|n| self.is_trainable(n)).collect()
    }

    /// Puts every parameter on the tape; `replace` swaps in an alternative
    /// value for one parameter (used by the finite-difference check).
    pub fn bind(&self, tape: &mut Tape, replace: Option<(usize, &Tensor)>) -> Vec<Var> {
        self.params
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let value = match replace {
                    Some((j, t)) if j == i => t.clone(),
                    _ => p.value.clone(),
                };
                if self.is_trainable(&p.name) {
                    tape.param(value)
                } else {
                    tape.constant(value)
                }
            })
            .collect()
    }

    fn var(&self, bound: &[Var], name: &str) -> Var {
        bound[self.params.position(name).unwrap_or_else(|| panic!("missing parameter {name}"))]
    }

    fn layer_vars(&self, bound: &[Var], prefix: &str) -> Vec<Var> {
        (0..self.hyper.layers).map(|l| self.var(bound, &layer_name(prefix, l))).collect()
    }

    fn dropout(&self, tape: &mut Tape, x: Var, rng: Option<&mut ChaCha8Rng>) -> Result<Var> {
        match rng {
            Some(rng) if self.hyper.dropout_rate > 0.0 => {
                let mask = crate::training::dropout_mask(tape.shape(x), self.hyper.dropout_rate, rng);
                tape.mask(x, mask)
            }
            _ => Ok(x),
        }
    }

    /// Channel is skipped (replaced by zeros) when its fixed weight is zero.
    fn channel_active(&self, k: usize) -> bool {
        self.hyper.learnable_lambda || self.hyper.lambda[k] != 0.0
    }

    /// embed -> BiLSTM -> channels -> fuse -> classify.
    pub fn forward(
        &self,
        tape: &mut Tape,
        bound: &[Var],
        s: &EncodedSentence,
        mode: ForwardMode<'_>,
    ) -> Result<ForwardOutput> {
        let ForwardMode {
            mut dropout,
            semantic_snapshot,
        } = mode;
        let n = s.tokens.len();
        let d = self.hyper.d_model;
        let h = self.hyper.hidden();

        let x = tape.gather_rows(self.var(bound, EMBEDDINGS), &s.tokens)?;
        let x = self.dropout(tape, x, dropout.as_deref_mut())?;
        let lstm = |dir: &str| LstmVars {
            w_ih: self.var(bound, &format!("encoder.{dir}.w_ih")),
            w_hh: self.var(bound, &format!("encoder.{dir}.w_hh")),
            bias: self.var(bound, &format!("encoder.{dir}.bias")),
        };
        let enc = EncoderVars {
            forward: lstm("forward"),
            backward: lstm("backward"),
            hidden: h,
        };
        let h0 = encode(tape, x, &enc)?;

        let mut relation_types = None;
        let (h_r, h_w) = if self.hyper.homogeneous {
            let layers = self.layer_vars(bound, "homogeneous");
            let top = homogeneous_forward(tape, h0, &s.graph, &layers)?;
            (top, top)
        } else {
            let h_r = if self.channel_active(0) {
                let vars = RelationVars {
                    types: self.var(bound, RELATION_TYPES),
                    edge_update: self.var(bound, RELATION_EDGE_UPDATE),
                    score: self.var(bound, RELATION_SCORE),
                    layers: self.layer_vars(bound, "relation"),
                };
                relation_types = Some(vars.types);
                relation_channel_forward(tape, h0, &s.graph, &vars)?.nodes
            } else {
                tape.constant(Tensor::zeros(&[n, d]))
            };
            let h_w = if self.channel_active(1) {
                let vars = WordVars {
                    types: self.var(bound, WORD_TYPES),
                    layers: self.layer_vars(bound, "word"),
                };
                word_channel_forward(tape, h0, &s.graph, &vars)?.nodes
            } else {
                tape.constant(Tensor::zeros(&[n, d]))
            };
            (h_r, h_w)
        };
        let h_s = if self.channel_active(2) {
            let layers = self.layer_vars(bound, "semantic");
            semantic_channel_forward(tape, h0, self.hyper.rho_sem, &layers, semantic_snapshot)?.0
        } else {
            tape.constant(Tensor::zeros(&[n, d]))
        };

        let z = fuse(tape, h_r, h_w, h_s, self.var(bound, FUSION_LAMBDA))?;
        let z = self.dropout(tape, z, dropout)?;
        let probs = classify(
            tape,
            z,
            self.var(bound, CLASSIFIER_WEIGHT),
            self.var(bound, CLASSIFIER_BIAS),
        )?;
        Ok(ForwardOutput {
            probs,
            h0,
            relation_types,
        })
    }

    /// Summed NLL of `batch` on a fresh tape. Returns the loss and the
    /// gradient of every trainable parameter (aligned with `params`).
    pub fn loss_and_gradients(
        &self,
        batch: &[&EncodedSentence],
        mut dropout: Option<&mut ChaCha8Rng>,
    ) -> Result<(f64, Vec<Option<Tensor>>)> {
        let mut tape = Tape::new();
        let bound = self.bind(&mut tape, None);
        let mut total: Option<Var> = None;
        for s in batch {
            let gold = s
                .gold
                .as_ref()
                .ok_or_else(|| Error::Contract("training sentence without gold labels".into()))?;
            let mode = ForwardMode {
                dropout: dropout.as_deref_mut(),
                semantic_snapshot: None,
            };
            let out = self.forward(&mut tape, &bound, s, mode)?;
            let loss = nll_loss(&mut tape, out.probs, gold)?;
            total = Some(match total {
                Some(t) => tape.add(t, loss)?,
                None => loss,
            });
        }
        let Some(total) = total else {
            return Ok((0.0, vec![None; self.params.len()]));
        };
        tape.backward(total)?;
        let grads = bound.iter().map(|&v| tape.grad(v).cloned()).collect();
        Ok((tape.value(total).item(), grads))
    }

    /// Evaluation-mode loss of one sentence, optionally with a parameter
    /// swapped out and a fixed semantic adjacency.
    pub fn eval_loss(
        &self,
        s: &EncodedSentence,
        replace: Option<(usize, &Tensor)>,
        snapshot: Option<&Tensor>,
    ) -> Result<f64> {
        let gold = s
            .gold
            .as_ref()
            .ok_or_else(|| Error::Contract("loss needs gold labels".into()))?;
        let mut tape = Tape::new();
        let bound = self.bind(&mut tape, replace);
        let out = self.forward(
            &mut tape,
            &bound,
            s,
            ForwardMode {
                dropout: None,
                semantic_snapshot: snapshot,
            },
        )?;
        let loss = nll_loss(&mut tape, out.probs, gold)?;
        Ok(tape.value(loss).item())
    }

    pub fn probabilities(&self, s: &EncodedSentence) -> Result<Tensor> {
        let mut tape = Tape::new();
        let bound = self.bind(&mut tape, None);
        let out = self.forward(&mut tape, &bound, s, ForwardMode::default())?;
        Ok(tape.value(out.probs).clone())
    }

    pub fn predict_encoded(&self, s: &EncodedSentence) -> Result<Prediction> {
        let probabilities = self.probabilities(s)?;
        let class_indices = argmax_rows(&probabilities);
        Ok(Prediction {
            labels: class_indices.iter().map(|&c| self.labels[c].clone()).collect(),
            class_indices,
            probabilities,
        })
    }

    pub fn predict(&self, sentence: &ParsedSentence) -> Result<Prediction> {
        self.predict_encoded(&self.encode_sentence(sentence, false)?)
    }

    /// Central-difference check of every trainable group on one labelled
    /// sentence, in evaluation mode with the semantic graph frozen at its
    /// unperturbed value.
    pub fn gradient_check(
        &self,
        s: &EncodedSentence,
        epsilon: f64,
        coords_per_group: usize,
        sample_seed: u64,
    ) -> Result<Vec<(String, GradCheckReport)>> {
        let gold = s
            .gold
            .as_ref()
            .ok_or_else(|| Error::Contract("gradient check needs gold labels".into()))?;
        let mut tape = Tape::new();
        let bound = self.bind(&mut tape, None);
        let out = self.forward(&mut tape, &bound, s, ForwardMode::default())?;
        let snapshot = crate::graphs::semantic_adjacency(tape.value(out.h0), self.hyper.rho_sem);
        let loss = nll_loss(&mut tape, out.probs, gold)?;
        tape.backward(loss)?;

        let mut reports = Vec::new();
        for (i, param) in self.params.iter().enumerate() {
            if !self.is_trainable(&param.name) {
                continue;
            }
            let analytic = tape
                .grad(bound[i])
                .cloned()
                .unwrap_or_else(|| Tensor::zeros(param.value.shape()));
            let coords = Coordinates::Sample {
                count: coords_per_group,
                seed: sample_seed.wrapping_add(i as u64),
            };
            let mut failure = None;
            let report = finite_difference_check(&param.value, &analytic, coords, epsilon, |probe| {
                self.eval_loss(s, Some((i, probe)), Some(&snapshot)).unwrap_or_else(|e| {
                    failure.get_or_insert(e);
                    f64::NAN
                })
            });
            if let Some(e) = failure {
                return Err(e);
            }
            reports.push((param.name.clone(), report));
        }
        Ok(reports)
    }
}

/// Random labelled sentence over a small synthetic inventory, for gradient
/// checks that need no corpus.
pub fn random_sentence<R: Rng>(tokens: usize, rng: &mut R) -> ParsedSentence {
    const WORDS: &[&str] = &["breaker", "trips", "cable", "old", "the", "inspect", "meter"];
    const POS: &[&str] = &["NN", "VB", "JJ", "DT"];
    const RELS: &[&str] = &["nsubj", "obj", "amod", "det"];
    const LABELS: &[&str] = &[NONE_LABEL, "defect", "operate"];
    let n = tokens.max(1);
    let root = rng.random_range(0..n);
    let mut arcs = Vec::new();
    for dep in 0..n {
        if dep == root {
            continue;
        }
        // attach to an earlier-processed node so the arcs form a tree
        let head = if dep == 0 || (dep < root && rng.random_bool(0.5)) { root } else { rng.random_range(0..n) };
        let head = if head == dep { root } else { head };
        arcs.push(crate::corpus::Arc::new(head, dep, RELS[rng.random_range(0..RELS.len())]));
    }
    ParsedSentence::new(
        (0..n).map(|_| WORDS[rng.random_range(0..WORDS.len())].to_string()).collect(),
        (0..n).map(|_| POS[rng.random_range(0..POS.len())].to_string()).collect(),
        arcs,
        (0..n).map(|_| LABELS[rng.random_range(0..LABELS.len())].to_string()).collect(),
    )
    .expect("valid random sentence")
}
