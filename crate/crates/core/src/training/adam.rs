use crate::error::{Error, Result};
use crate::model::ParamStore;
use crate::numerics::Tensor;

/// Bias-corrected Adam with an L2 term `l2 · θ` folded into each gradient.
#[derive(Clone, Debug)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    steps: i32,
    moments: Vec<Option<(Tensor, Tensor)>>,
}

impl Default for Adam {
    fn default() -> Self {
        Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            steps: 0,
            moments: Vec::new(),
        }
    }
}

impl Adam {
    pub fn steps(&self) -> i32 {
        self.steps
    }

    /// Updates every parameter whose gradient is `Some`. The whole step is
    /// rejected, leaving parameters untouched, if any gradient is non-finite.
    pub fn step(&mut self, params: &mut ParamStore, grads: &[Option<Tensor>], lr: f64, l2: f64) -> Result<()> {
        if grads.len() != params.len() {
            return Err(Error::Contract(format!(
                "{} gradients for {} parameters",
                grads.len(),
                params.len()
            )));
        }
        for (p, g) in params.iter().zip(grads) {
            if let Some(g) = g {
                if !g.same_shape(&p.value) {
                    return Err(Error::dim("adam_step", g.shape(), p.value.shape()));
                }
                if !g.all_finite() {
                    return Err(Error::NonFiniteGradient(p.name.clone()));
                }
            }
        }
        self.moments.resize(params.len(), None);
        self.steps += 1;
        let c1 = 1.0 - self.beta1.powi(self.steps);
        let c2 = 1.0 - self.beta2.powi(self.steps);
        for ((p, g), slot) in params.iter_mut().zip(grads).zip(&mut self.moments) {
            let Some(g) = g else { continue };
            let (m, v) = slot.get_or_insert_with(|| (Tensor::zeros(g.shape()), Tensor::zeros(g.shape())));
            let moments = m.data_mut().iter_mut().zip(v.data_mut());
            for ((theta, &grad), (mi, vi)) in p.value.data_mut().iter_mut().zip(g.data()).zip(moments) {
                let gi = grad + l2 * *theta;
                *mi = self.beta1 * *mi + (1.0 - self.beta1) * gi;
                *vi = self.beta2 * *vi + (1.0 - self.beta2) * gi * gi;
                let (m_hat, v_hat) = (*mi / c1, *vi / c2);
                *theta -= lr * m_hat / (v_hat.sqrt() + self.epsilon);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store(values: &[f64]) -> ParamStore {
        let mut p = ParamStore::default();
        p.push("theta", Tensor::matrix(1, values.len(), values.to_vec()).unwrap());
        p
    }

    #[test]
    fn zero_gradient_without_l2_is_a_no_op() {
        let mut p = store(&[1.0, -2.0, 3.0]);
        let before = p.clone();
        let mut adam = Adam::default();
        for _ in 0..10 {
            adam.step(&mut p, &[Some(Tensor::zeros(&[1, 3]))], 0.15, 0.0).unwrap();
        }
        assert_eq!(p, before);
    }

    #[test]
    fn minimises_a_quadratic() {
        // loss = θ², gradient 2θ
        let mut p = store(&[3.0]);
        let mut adam = Adam::default();
        for _ in 0..500 {
            let theta = p.at(0).value.data()[0];
            adam.step(&mut p, &[Some(Tensor::matrix(1, 1, vec![2.0 * theta]).unwrap())], 0.05, 0.0)
                .unwrap();
        }
        assert!(p.at(0).value.data()[0].abs() < 1e-3, "{:?}", p.at(0).value);
    }

    #[test]
    fn first_step_moves_by_lr() {
        // With bias correction the first update is lr·g/(|g|+ε).
        let mut p = store(&[1.0]);
        Adam::default()
            .step(&mut p, &[Some(Tensor::matrix(1, 1, vec![0.5]).unwrap())], 0.1, 0.0)
            .unwrap();
        let expected = 1.0 - 0.1 * 0.5 / (0.5 + 1e-8);
        assert!((p.at(0).value.data()[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn l2_pulls_toward_zero() {
        let mut p = store(&[2.0]);
        Adam::default()
            .step(&mut p, &[Some(Tensor::zeros(&[1, 1]))], 0.1, 0.001)
            .unwrap();
        assert!(p.at(0).value.data()[0] < 2.0);
    }

    #[test]
    fn nan_gradient_names_the_group() {
        let mut p = store(&[1.0]);
        let err = Adam::default()
            .step(&mut p, &[Some(Tensor::matrix(1, 1, vec![f64::NAN]).unwrap())], 0.1, 0.0)
            .unwrap_err();
        assert!(matches!(err, Error::NonFiniteGradient(ref n) if n == "theta"));
        assert_eq!(p.at(0).value.data()[0], 1.0);
    }

    #[test]
    fn skipped_groups_are_untouched() {
        let mut p = store(&[1.0]);
        p.push("frozen", Tensor::filled(&[1, 1], 4.0));
        Adam::default()
            .step(&mut p, &[Some(Tensor::filled(&[1, 1], 1.0)), None], 0.1, 0.5)
            .unwrap();
        assert_eq!(p.at(1).value.data()[0], 4.0);
    }
}
