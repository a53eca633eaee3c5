//! Optimisation, evaluation and the experiment harnesses.

mod adam;
mod dropout;
mod eval;
mod harness;
mod hyper;
mod metrics;
mod trainer;

pub use adam::Adam;
pub use dropout::{apply_dropout, dropout_mask, DropoutMode};
pub use eval::{evaluate, evaluate_encoded, score_predictions, ClassCounts, EvalReport, Scores};
pub use harness::{ablate, subsample, sweep, SweepAxis, Variant};
pub use hyper::Hyperparameters;
pub use metrics::{MetricsRecord, MetricsSink};
pub use trainer::{train, StopReason, TrainHistory, TrainOptions, TrainRun};
