use rand::seq::SliceRandom;
use serde::Serialize;

use super::{evaluate_encoded, Adam, EvalReport, Hyperparameters, MetricsRecord, MetricsSink};
use crate::corpus::CorpusSplit;
use crate::error::{Error, Result};
use crate::model::{EncodedSentence, Model, ParamStore, FUSION_LAMBDA};
use crate::seed;

/// Lower bound for learnable fusion weights after each update.
const LAMBDA_MIN: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StopReason {
    /// Validation loss did not decrease for `patience` epochs.
    Patience,
    EpochLimit,
    Diverged,
}

/// Per-epoch series, 1-based epochs (`train_loss[0]` is epoch 1).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrainHistory {
    pub train_loss: Vec<f64>,
    pub valid_loss: Vec<f64>,
    pub valid_f1: Vec<f64>,
    /// Epoch whose parameters were kept; 0 if no epoch completed.
    pub best_epoch: usize,
    pub stop_epoch: usize,
    pub stop_reason: StopReason,
}

impl TrainHistory {
    pub fn best_valid_loss(&self) -> Option<f64> {
        self.valid_loss.get(self.best_epoch.checked_sub(1)?).copied()
    }
}

#[derive(Clone, Debug)]
pub struct TrainRun {
    pub model: Model,
    pub history: TrainHistory,
    /// Test-split report for the kept parameters, if the split has a test set.
    pub test: Option<EvalReport>,
}

#[derive(Default)]
pub struct TrainOptions<'a> {
    pub embeddings: Option<&'a str>,
    pub metrics: Option<&'a MetricsSink>,
    pub run_id: String,
}

fn emit(options: &TrainOptions<'_>, record: MetricsRecord) -> Result<()> {
    match options.metrics {
        Some(sink) => sink.emit(&record),
        None => Ok(()),
    }
}

/// Mini-batch Adam with early stopping on validation loss; the returned
/// model carries the parameters of the best validation epoch.
pub fn train(hyper: &Hyperparameters, split: &CorpusSplit, options: &TrainOptions<'_>) -> Result<TrainRun> {
    hyper.validate()?;
    if split.train.is_empty() || split.valid.is_empty() {
        return Err(Error::Contract("training needs non-empty train and valid sets".into()));
    }
    let all: Vec<_> = split.train.iter().chain(&split.valid).chain(&split.test).cloned().collect();
    let mut model = Model::for_corpus(hyper.clone(), &split.train, &all, options.embeddings)?;
    let train_set = model.encode_all(&split.train)?;
    let valid_set = model.encode_all(&split.valid)?;
    let test_set = model.encode_all(&split.test)?;

    let run_id = options.run_id.as_str();
    let mut shuffle_rng = seed::rng(hyper.seed, seed::SHUFFLE);
    let mut dropout_rng = seed::rng(hyper.seed, seed::DROPOUT);
    let mut adam = Adam::default();
    let mut best: Option<(f64, ParamStore)> = None;
    let mut history = TrainHistory {
        train_loss: Vec::new(),
        valid_loss: Vec::new(),
        valid_f1: Vec::new(),
        best_epoch: 0,
        stop_epoch: 0,
        stop_reason: StopReason::EpochLimit,
    };
    let mut order: Vec<usize> = (0..train_set.len()).collect();

    for epoch in 1..=hyper.epochs {
        history.stop_epoch = epoch;
        order.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(hyper.batch_size) {
            let batch: Vec<&EncodedSentence> = chunk.iter().map(|&i| &train_set[i]).collect();
            let (loss, grads) = model.loss_and_gradients(&batch, Some(&mut dropout_rng))?;
            epoch_loss += loss;
            if !loss.is_finite() {
                break;
            }
            adam.step(&mut model.params, &grads, hyper.learning_rate, hyper.l2_coefficient)?;
            if hyper.learnable_lambda {
                if let Some(l) = model.params.get_mut(FUSION_LAMBDA) {
                    l.data_mut().iter_mut().for_each(|v| *v = v.max(LAMBDA_MIN));
                }
            }
        }
        history.train_loss.push(epoch_loss);
        emit(options, MetricsRecord::loss_only(run_id, epoch, "train", epoch_loss))?;
        if !epoch_loss.is_finite() {
            history.stop_reason = StopReason::Diverged;
            return Err(Error::Diverged {
                epoch,
                history: Box::new(history),
            });
        }

        let report = evaluate_encoded(&model, &valid_set)?;
        emit(options, MetricsRecord::from_report(run_id, epoch, "valid", &report))?;
        log::info!(
            "[{run_id}] epoch {epoch}: train loss {epoch_loss:.4}, valid loss {:.4}, valid F1 {:.4}",
            report.loss,
            report.classification.f1
        );
        history.valid_loss.push(report.loss);
        history.valid_f1.push(report.classification.f1);
        if !report.loss.is_finite() {
            history.stop_reason = StopReason::Diverged;
            return Err(Error::Diverged {
                epoch,
                history: Box::new(history),
            });
        }
        if best.as_ref().is_none_or(|(l, _)| report.loss < *l) {
            best = Some((report.loss, model.params.clone()));
            history.best_epoch = epoch;
        } else if epoch - history.best_epoch >= hyper.patience {
            history.stop_reason = StopReason::Patience;
            break;
        }
    }

    if let Some((_, params)) = best {
        model.params = params;
    }
    let test = if test_set.is_empty() {
        None
    } else {
        let report = evaluate_encoded(&model, &test_set)?;
        emit(options, MetricsRecord::from_report(run_id, history.best_epoch, "test", &report))?;
        Some(report)
    };
    if let Some(sink) = options.metrics {
        sink.flush()?;
    }
    Ok(TrainRun { model, history, test })
}
