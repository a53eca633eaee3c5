//! Hyperparameters, presets and the flat `key = value` config format.

use std::fmt::Write as _;

use crate::detector::FusionParameters;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Hyperparameters {
    pub learning_rate: f64,
    pub l2_coefficient: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub layers: usize,
    pub d_word: usize,
    pub d_model: usize,
    pub d_r: usize,
    pub d_w: usize,
    pub dropout_rate: f64,
    pub rho_sem: f64,
    pub lambda: [f64; 3],
    pub learnable_lambda: bool,
    pub patience: usize,
    pub seed: u64,
    pub min_count: usize,
    pub init_std: f64,
    /// Hold the relation-type table at its initial values.
    pub freeze_relation_types: bool,
    /// Hold the word-type table at its initial values.
    pub freeze_word_types: bool,
    /// Replace both typed graphs with one untyped GCN.
    pub homogeneous: bool,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self::poe()
    }
}

impl Hyperparameters {
    /// Published settings for the power-systems corpus.
    pub fn poe() -> Self {
        Hyperparameters {
            learning_rate: 0.15,
            l2_coefficient: 0.001,
            epochs: 100,
            batch_size: 10,
            layers: 2,
            d_word: 100,
            d_model: 150,
            d_r: 25,
            d_w: 25,
            dropout_rate: 0.60,
            rho_sem: 0.15,
            lambda: [2.0, 1.0, 2.0],
            learnable_lambda: false,
            patience: 100,
            seed: 0,
            min_count: 1,
            init_std: 0.1,
            freeze_relation_types: false,
            freeze_word_types: false,
            homogeneous: false,
        }
    }

    pub fn ace2005() -> Self {
        Hyperparameters {
            dropout_rate: 0.55,
            rho_sem: 0.10,
            ..Self::poe()
        }
    }

    pub fn maven() -> Self {
        Hyperparameters {
            batch_size: 32,
            dropout_rate: 0.50,
            rho_sem: 0.12,
            ..Self::poe()
        }
    }

    /// Desk-scale settings for the synthetic corpus: small dimensions, one
    /// graph layer and a conventional Adam step size.
    pub fn synthetic() -> Self {
        Hyperparameters {
            learning_rate: 0.01,
            epochs: 40,
            layers: 1,
            d_word: 32,
            d_model: 32,
            d_r: 8,
            d_w: 8,
            dropout_rate: 0.1,
            patience: 15,
            ..Self::poe()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "poe" => Ok(Self::poe()),
            "ace2005" => Ok(Self::ace2005()),
            "maven" => Ok(Self::maven()),
            "synthetic" => Ok(Self::synthetic()),
            other => Err(Error::Config(format!("unknown preset `{other}`"))),
        }
    }

    pub fn hidden(&self) -> usize {
        self.d_model / 2
    }

    pub fn fusion(&self) -> FusionParameters {
        FusionParameters {
            lambdas: self.lambda,
            learnable: self.learnable_lambda,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if self.l2_coefficient.is_nan() || self.l2_coefficient < 0.0 {
            return fail("l2_coefficient must be non-negative".into());
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return fail(format!("dropout_rate must be in [0, 1), got {}", self.dropout_rate));
        }
        if self.patience < 1 {
            return fail("patience must be at least 1".into());
        }
        if self.layers < 1 {
            return fail("layers must be at least 1".into());
        }
        if self.batch_size < 1 || self.min_count < 1 {
            return fail("batch_size and min_count must be at least 1".into());
        }
        if self.d_model == 0 || !self.d_model.is_multiple_of(2) {
            return fail(format!("d_model must be even and positive, got {}", self.d_model));
        }
        if self.d_word == 0 || self.d_r == 0 || self.d_w == 0 {
            return fail("dimensions must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.rho_sem) {
            return fail(format!("rho_sem must be in [0, 1], got {}", self.rho_sem));
        }
        if !(self.init_std > 0.0 && self.init_std.is_finite()) {
            return fail("init_std must be positive".into());
        }
        self.fusion().validate()
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::Config(format!("bad value `{v}` for `{key}`")))
        }
        match key {
            "preset" => *self = Self::preset(value)?,
            "learning_rate" => self.learning_rate = num(key, value)?,
            "l2_coefficient" => self.l2_coefficient = num(key, value)?,
            "epochs" => self.epochs = num(key, value)?,
            "batch_size" => self.batch_size = num(key, value)?,
            "layers" => self.layers = num(key, value)?,
            "d_word" => self.d_word = num(key, value)?,
            "d_model" => self.d_model = num(key, value)?,
            "d_r" => self.d_r = num(key, value)?,
            "d_w" => self.d_w = num(key, value)?,
            "dropout_rate" => self.dropout_rate = num(key, value)?,
            "rho_sem" => self.rho_sem = num(key, value)?,
            "lambda1" => self.lambda[0] = num(key, value)?,
            "lambda2" => self.lambda[1] = num(key, value)?,
            "lambda3" => self.lambda[2] = num(key, value)?,
            "lambda" => {
                let parts: Vec<f64> = value
                    .split(',')
                    .map(|p| num(key, p.trim()))
                    .collect::<Result<_>>()?;
                self.lambda = parts
                    .try_into()
                    .map_err(|_| Error::Config(format!("`lambda` needs three values, got `{value}`")))?;
            }
            "learnable_lambda" => self.learnable_lambda = num(key, value)?,
            "patience" => self.patience = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "min_count" => self.min_count = num(key, value)?,
            "init_std" => self.init_std = num(key, value)?,
            "freeze_relation_types" => self.freeze_relation_types = num(key, value)?,
            "freeze_word_types" => self.freeze_word_types = num(key, value)?,
            "homogeneous" => self.homogeneous = num(key, value)?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Parses a config file. A `preset` line, if any, should come first since
    /// it resets every field.
    pub fn parse(text: &str, base: Hyperparameters) -> Result<Self> {
        let mut h = base;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("expected key = value, got `{line}`"),
            })?;
            h.set(key.trim(), value.trim()).map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
        }
        h.validate()?;
        Ok(h)
    }

    /// Every field as `key = value` lines; `parse` reads it back exactly.
    pub fn to_config(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| writeln!(s, "{k} = {v}").expect("write to String");
        put("learning_rate", self.learning_rate.to_string());
        put("l2_coefficient", self.l2_coefficient.to_string());
        put("epochs", self.epochs.to_string());
        put("batch_size", self.batch_size.to_string());
        put("layers", self.layers.to_string());
        put("d_word", self.d_word.to_string());
        put("d_model", self.d_model.to_string());
        put("d_r", self.d_r.to_string());
        put("d_w", self.d_w.to_string());
        put("dropout_rate", self.dropout_rate.to_string());
        put("rho_sem", self.rho_sem.to_string());
        put("lambda1", self.lambda[0].to_string());
        put("lambda2", self.lambda[1].to_string());
        put("lambda3", self.lambda[2].to_string());
        put("learnable_lambda", self.learnable_lambda.to_string());
        put("patience", self.patience.to_string());
        put("seed", self.seed.to_string());
        put("min_count", self.min_count.to_string());
        put("init_std", self.init_std.to_string());
        put("freeze_relation_types", self.freeze_relation_types.to_string());
        put("freeze_word_types", self.freeze_word_types.to_string());
        put("homogeneous", self.homogeneous.to_string());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_values() {
        let h = Hyperparameters::poe();
        assert_eq!((h.learning_rate, h.l2_coefficient), (0.15, 0.001));
        assert_eq!((h.d_word, h.d_model, h.d_r, h.d_w, h.layers), (100, 150, 25, 25, 2));
        assert_eq!((h.batch_size, h.epochs, h.patience), (10, 100, 100));
        assert_eq!((h.dropout_rate, h.rho_sem), (0.60, 0.15));
        assert_eq!(h.lambda, [2.0, 1.0, 2.0]);
        assert_eq!(h.hidden(), 75);
        assert_eq!(Hyperparameters::ace2005().rho_sem, 0.10);
        assert_eq!(Hyperparameters::maven().batch_size, 32);
        assert_eq!(Hyperparameters::maven().rho_sem, 0.12);
        h.validate().unwrap();
        Hyperparameters::synthetic().validate().unwrap();
    }

    #[test]
    fn config_round_trip() {
        let mut h = Hyperparameters::synthetic();
        h.learning_rate = 0.0123456789;
        h.freeze_relation_types = true;
        let back = Hyperparameters::parse(&h.to_config(), Hyperparameters::poe()).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn config_errors() {
        let base = Hyperparameters::poe;
        assert!(matches!(Hyperparameters::parse("epochs 3", base()), Err(Error::Parse { line: 1, .. })));
        assert!(Hyperparameters::parse("bogus = 1", base()).is_err());
        assert!(Hyperparameters::parse("dropout_rate = 1.0", base()).is_err());
        assert!(Hyperparameters::parse("patience = 0", base()).is_err());
        assert!(Hyperparameters::parse("learning_rate = 0", base()).is_err());
        assert!(Hyperparameters::parse("d_model = 31", base()).is_err());
        let h = Hyperparameters::parse("preset = synthetic\nlambda = 1, 0, 0\n# c\n", base()).unwrap();
        assert_eq!(h.lambda, [1.0, 0.0, 0.0]);
        assert_eq!(h.d_model, 32);
    }
}
