use std::collections::BTreeMap;

use serde::Serialize;

use crate::corpus::ParsedSentence;
use crate::detector::{argmax_rows, PROB_FLOOR};
use crate::error::{Error, Result};
use crate::model::{EncodedSentence, Model};

/// Precision, recall and F1 with the counts behind them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positives: usize,
    pub predicted: usize,
    pub gold: usize,
}

impl Scores {
    /// Zero denominators give 0.
    pub fn from_counts(true_positives: usize, predicted: usize, gold: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(true_positives, predicted);
        let recall = ratio(true_positives, gold);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Scores {
            precision,
            recall,
            f1,
            true_positives,
            predicted,
            gold,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ClassCounts {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct EvalReport {
    /// Trigger vs. non-trigger, ignoring the event type.
    pub identification: Scores,
    /// Trigger with the correct event type.
    pub classification: Scores,
    pub per_class: BTreeMap<String, ClassCounts>,
    /// Summed negative log-likelihood.
    pub loss: f64,
    pub tokens: usize,
}

/// Token-level scoring. Class index 0 is `NONE`.
pub fn score_predictions(labels: &[String], gold: &[Vec<usize>], predicted: &[Vec<usize>]) -> Result<EvalReport> {
    if gold.len() != predicted.len() {
        return Err(Error::Contract(format!(
            "{} gold sentences but {} predictions",
            gold.len(),
            predicted.len()
        )));
    }
    let (mut id_tp, mut cls_tp, mut n_pred, mut n_gold, mut tokens) = (0, 0, 0, 0, 0);
    let mut per_class: BTreeMap<String, ClassCounts> =
        labels.iter().skip(1).map(|l| (l.clone(), ClassCounts::default())).collect();
    for (g_row, p_row) in gold.iter().zip(predicted) {
        if g_row.len() != p_row.len() {
            return Err(Error::Contract("gold and predicted lengths differ".into()));
        }
        for (&g, &p) in g_row.iter().zip(p_row) {
            tokens += 1;
            n_gold += usize::from(g != 0);
            n_pred += usize::from(p != 0);
            id_tp += usize::from(g != 0 && p != 0);
            cls_tp += usize::from(g != 0 && p == g);
            if g != 0 && p == g {
                per_class.get_mut(&labels[g]).expect("label").true_positives += 1;
                continue;
            }
            if p != 0 {
                per_class.get_mut(&labels[p]).expect("label").false_positives += 1;
            }
            if g != 0 {
                per_class.get_mut(&labels[g]).expect("label").false_negatives += 1;
            }
        }
    }
    Ok(EvalReport {
        identification: Scores::from_counts(id_tp, n_pred, n_gold),
        classification: Scores::from_counts(cls_tp, n_pred, n_gold),
        per_class,
        loss: 0.0,
        tokens,
    })
}

pub fn evaluate_encoded(model: &Model, sentences: &[EncodedSentence]) -> Result<EvalReport> {
    let mut gold = Vec::with_capacity(sentences.len());
    let mut predicted = Vec::with_capacity(sentences.len());
    let mut loss = 0.0;
    for s in sentences {
        let g = s
            .gold
            .as_ref()
            .ok_or_else(|| Error::Contract("evaluation needs gold labels".into()))?;
        let probs = model.probabilities(s)?;
        for (i, &c) in g.iter().enumerate() {
            let p = probs.get(i, c);
            loss -= if p.is_nan() { p } else { p.max(PROB_FLOOR).ln() };
        }
        predicted.push(argmax_rows(&probs));
        gold.push(g.clone());
    }
    let mut report = score_predictions(&model.labels, &gold, &predicted)?;
    report.loss = loss;
    Ok(report)
}

pub fn evaluate(model: &Model, sentences: &[ParsedSentence]) -> Result<EvalReport> {
    evaluate_encoded(model, &model.encode_all(sentences)?)
}
