//! Central finite-difference oracle for analytic gradients.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::numerics::tensor::Tensor;

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    /// Max of `|analytic - numeric| / max(1, |numeric|)` over checked coordinates.
    pub max_rel_error: f64,
    /// Coordinate (flat index) where the maximum was attained.
    pub worst_index: Option<usize>,
    /// First coordinate where either side was NaN or infinite.
    pub non_finite_at: Option<usize>,
    pub checked: usize,
}

impl GradCheckReport {
    pub fn passed(&self, tolerance: f64) -> bool {
        self.non_finite_at.is_none() && self.max_rel_error < tolerance
    }
}

/// Which coordinates of a parameter tensor to probe.
#[derive(Clone, Copy, Debug)]
pub enum Coordinates {
    All,
    /// Up to `count` distinct coordinates drawn with `seed`.
    Sample { count: usize, seed: u64 },
}

impl Coordinates {
    pub fn resolve(self, len: usize) -> Vec<usize> {
        match self {
            Coordinates::Sample { count, seed } if count < len => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut picked = sample(&mut rng, len, count).into_vec();
                picked.sort_unstable();
                picked
            }
            _ => (0..len).collect(),
        }
    }
}

/// Compares `analytic` against central differences of `loss_fn` around
/// `param`. `loss_fn` receives the perturbed tensor and must be
/// deterministic.
pub fn finite_difference_check<F>(
    param: &Tensor,
    analytic: &Tensor,
    coords: Coordinates,
    epsilon: f64,
    mut loss_fn: F,
) -> GradCheckReport
where
    F: FnMut(&Tensor) -> f64,
{
    assert!(epsilon > 0.0, "epsilon must be positive");
    assert_eq!(param.shape(), analytic.shape(), "gradient shape");
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst_index: None,
        non_finite_at: None,
        checked: 0,
    };
    let mut probe = param.clone();
    for idx in coords.resolve(param.len()) {
        let original = probe.data()[idx];
        probe.data_mut()[idx] = original + epsilon;
        let plus = loss_fn(&probe);
        probe.data_mut()[idx] = original - epsilon;
        let minus = loss_fn(&probe);
        probe.data_mut()[idx] = original;

        let numeric = (plus - minus) / (2.0 * epsilon);
        let exact = analytic.data()[idx];
        report.checked += 1;
        if !numeric.is_finite() || !exact.is_finite() {
            report.non_finite_at.get_or_insert(idx);
            continue;
        }
        let rel = (exact - numeric).abs() / numeric.abs().max(1.0);
        if rel > report.max_rel_error || report.worst_index.is_none() {
            report.max_rel_error = report.max_rel_error.max(rel);
            report.worst_index = Some(idx);
        }
    }
    report
}
