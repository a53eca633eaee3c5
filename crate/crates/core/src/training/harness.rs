use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;

use super::{train, EvalReport, Hyperparameters, MetricsSink, TrainOptions};
use crate::corpus::{CorpusSplit, ParsedSentence};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// Subset of {relation, word, semantic} channels that stay switched on.
    Channels([bool; 3]),
    FreezeRelationTypes,
    FreezeWordTypes,
    Homogeneous,
}

impl Variant {
    pub const ALL: [&'static str; 10] = [
        "G1", "G2", "G3", "G1+G2", "G1+G3", "G2+G3", "G1+G2+G3", "freeze-R", "freeze-A", "homogeneous",
    ];

    /// Hyperparameters for this variant. Channel subsets zero the excluded
    /// weights and hold the rest fixed, so a dropped channel stays dropped.
    pub fn apply(&self, base: &Hyperparameters) -> Hyperparameters {
        let mut h = base.clone();
        match *self {
            Variant::Channels([true, true, true]) => {}
            Variant::Channels(on) => {
                h.learnable_lambda = false;
                for (lambda, keep) in h.lambda.iter_mut().zip(on) {
                    if !keep {
                        *lambda = 0.0;
                    }
                }
            }
            Variant::FreezeRelationTypes => h.freeze_relation_types = true,
            Variant::FreezeWordTypes => h.freeze_word_types = true,
            Variant::Homogeneous => h.homogeneous = true,
        }
        h
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "freeze-R" => return Ok(Variant::FreezeRelationTypes),
            "freeze-A" => return Ok(Variant::FreezeWordTypes),
            "homogeneous" => return Ok(Variant::Homogeneous),
            _ => {}
        }
        let mut on = [false; 3];
        let mut previous = 0;
        for part in s.trim().split('+') {
            let k = match part {
                "G1" => 1,
                "G2" => 2,
                "G3" => 3,
                _ => 0,
            };
            // canonical spelling only: increasing, no repeats
            if k <= previous {
                return Err(Error::Config(format!(
                    "unknown variant `{s}`; expected one of {}",
                    Variant::ALL.join(", ")
                )));
            }
            on[k - 1] = true;
            previous = k;
        }
        Ok(Variant::Channels(on))
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Channels(on) => {
                let names: Vec<String> = (0..3).filter(|&k| on[k]).map(|k| format!("G{}", k + 1)).collect();
                f.write_str(&names.join("+"))
            }
            Variant::FreezeRelationTypes => f.write_str("freeze-R"),
            Variant::FreezeWordTypes => f.write_str("freeze-A"),
            Variant::Homogeneous => f.write_str("homogeneous"),
        }
    }
}

/// Trains and tests every variant on the same split and seed.
pub fn ablate(
    hyper: &Hyperparameters,
    split: &CorpusSplit,
    variants: &[Variant],
    metrics: Option<&MetricsSink>,
) -> Result<Vec<(Variant, EvalReport)>> {
    if variants.is_empty() {
        return Err(Error::Config("no ablation variants given".into()));
    }
    variants
        .iter()
        .map(|v| {
            let options = TrainOptions {
                embeddings: None,
                metrics,
                run_id: format!("ablate:{v}:seed={}", hyper.seed),
            };
            let run = train(&v.apply(hyper), split, &options)?;
            Ok((*v, run.test.unwrap_or_default()))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    LabelRate,
    Layers,
    DModel,
    RhoSem,
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "label_rate" => Ok(SweepAxis::LabelRate),
            "layers" => Ok(SweepAxis::Layers),
            "d_model" => Ok(SweepAxis::DModel),
            "rho_sem" => Ok(SweepAxis::RhoSem),
            other => Err(Error::Config(format!(
                "unknown sweep axis `{other}`; expected label_rate, layers, d_model or rho_sem"
            ))),
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::LabelRate => "label_rate",
            SweepAxis::Layers => "layers",
            SweepAxis::DModel => "d_model",
            SweepAxis::RhoSem => "rho_sem",
        })
    }
}

/// Keeps `round(rate · n)` sentences (at least one), in corpus order.
/// A rate of 1 returns the input unchanged.
pub fn subsample(sentences: &[ParsedSentence], rate: f64, master_seed: u64) -> Result<Vec<ParsedSentence>> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::Config(format!("label_rate must be in (0, 1], got {rate}")));
    }
    if rate == 1.0 {
        return Ok(sentences.to_vec());
    }
    let keep = ((sentences.len() as f64 * rate).round() as usize).max(1).min(sentences.len());
    let mut idx: Vec<usize> = (0..sentences.len()).collect();
    idx.shuffle(&mut seed::rng(master_seed, seed::SUBSAMPLE));
    idx.truncate(keep);
    idx.sort_unstable();
    Ok(idx.into_iter().map(|i| sentences[i].clone()).collect())
}

fn integral(axis: SweepAxis, v: f64) -> Result<usize> {
    if v >= 1.0 && v.fract() == 0.0 && v < u32::MAX as f64 {
        Ok(v as usize)
    } else {
        Err(Error::Config(format!("{axis} needs positive integer values, got {v}")))
    }
}

/// One train/test run per value, all with the same seed.
pub fn sweep(
    hyper: &Hyperparameters,
    split: &CorpusSplit,
    axis: SweepAxis,
    values: &[f64],
    metrics: Option<&MetricsSink>,
) -> Result<Vec<(f64, EvalReport)>> {
    if values.is_empty() {
        return Err(Error::Config(format!("no values given for sweep over {axis}")));
    }
    let mut out = Vec::with_capacity(values.len());
    for &value in values {
        let mut h = hyper.clone();
        let mut s = split.clone();
        match axis {
            SweepAxis::LabelRate => s.train = subsample(&split.train, value, hyper.seed)?,
            SweepAxis::Layers => h.layers = integral(axis, value)?,
            SweepAxis::DModel => h.d_model = integral(axis, value)?,
            SweepAxis::RhoSem => h.rho_sem = value,
        }
        let options = TrainOptions {
            embeddings: None,
            metrics,
            run_id: format!("sweep:{axis}={value}"),
        };
        let run = train(&h, &s, &options)?;
        out.push((value, run.test.unwrap_or_default()));
    }
    Ok(out)
}
