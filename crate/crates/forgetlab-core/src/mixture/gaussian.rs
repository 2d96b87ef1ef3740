//! Gaussian components, mixtures, log-densities, and seeded sampling.

use rand::Rng;

use super::{normal_cdf, MixtureError};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// One univariate Gaussian mode. The scale is stored as `log(sigma)` so that
/// gradient updates on the unconstrained parameter can never produce a
/// non-positive standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianComponent {
    mean: f64,
    log_std: f64,
}

impl GaussianComponent {
    /// Builds a component from mean and standard deviation (`std > 0`).
    pub fn new(mean: f64, std: f64) -> Result<Self, MixtureError> {
        if !(std.is_finite() && std > 0.0) {
            return Err(MixtureError::InvalidStd(std));
        }
        if !mean.is_finite() {
            return Err(MixtureError::NonFinite(mean));
        }
        Ok(Self {
            mean,
            log_std: std.ln(),
        })
    }

    /// Builds a component directly from the unconstrained parameters.
    pub fn from_log_std(mean: f64, log_std: f64) -> Self {
        Self { mean, log_std }
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn std(&self) -> f64 {
        self.log_std.exp()
    }

    pub fn log_std(&self) -> f64 {
        self.log_std
    }

    /// log N(y; mean, std^2)
    pub fn log_density(&self, y: f64) -> f64 {
        let z = (y - self.mean) / self.std();
        -0.5 * z * z - self.log_std - LN_SQRT_2PI
    }

    pub fn density(&self, y: f64) -> f64 {
        self.log_density(y).exp()
    }

    /// Probability mass lying outside `[lo, hi]`.
    pub fn tail_mass_outside(&self, lo: f64, hi: f64) -> f64 {
        let s = self.std();
        normal_cdf((lo - self.mean) / s) + (1.0 - normal_cdf((hi - self.mean) / s))
    }

    /// One draw via Box-Muller (two uniforms per normal; deterministic in the
    /// rng stream).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
        let u2: f64 = rng.gen();
        let z = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        self.mean + self.std() * z
    }
}

/// A normalized weighted sum of Gaussian components. Uni-modal policies are
/// the length-1 special case.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    weights: Vec<f64>,
    components: Vec<GaussianComponent>,
}

impl GaussianMixture {
    pub fn new(
        weights: Vec<f64>,
        components: Vec<GaussianComponent>,
    ) -> Result<Self, MixtureError> {
        if weights.is_empty() {
            return Err(MixtureError::Empty);
        }
        if weights.len() != components.len() {
            return Err(MixtureError::LengthMismatch(
                weights.len(),
                components.len(),
            ));
        }
        for &w in &weights {
            if !(0.0..=1.0).contains(&w) || !w.is_finite() {
                return Err(MixtureError::WeightOutOfRange(w));
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(MixtureError::UnnormalizedWeights(sum));
        }
        Ok(Self {
            weights,
            components,
        })
    }

    /// Single Gaussian as a degenerate mixture.
    pub fn single(mean: f64, std: f64) -> Result<Self, MixtureError> {
        Ok(Self {
            weights: vec![1.0],
            components: vec![GaussianComponent::new(mean, std)?],
        })
    }

    /// Two-component mixture with weight `w_first` on the first component.
    pub fn two(
        w_first: f64,
        first: GaussianComponent,
        second: GaussianComponent,
    ) -> Result<Self, MixtureError> {
        Self::new(vec![w_first, 1.0 - w_first], vec![first, second])
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    /// log pi(y) via log-sum-exp over the component log-densities.
    pub fn log_density(&self, y: f64) -> Result<f64, MixtureError> {
        if !y.is_finite() {
            return Err(MixtureError::NonFinite(y));
        }
        Ok(self.log_density_unchecked(y))
    }

    pub(crate) fn log_density_unchecked(&self, y: f64) -> f64 {
        let term = |w: f64, c: &GaussianComponent| {
            if w > 0.0 {
                w.ln() + c.log_density(y)
            } else {
                f64::NEG_INFINITY
            }
        };
        let mut max = f64::NEG_INFINITY;
        for (w, c) in self.weights.iter().zip(&self.components) {
            max = max.max(term(*w, c));
        }
        if max == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        let sum: f64 = self
            .weights
            .iter()
            .zip(&self.components)
            .map(|(w, c)| (term(*w, c) - max).exp())
            .sum();
        max + sum.ln()
    }

    pub fn density(&self, y: f64) -> f64 {
        self.log_density_unchecked(y).exp()
    }

    /// Densities at every grid point.
    pub fn density_on(&self, grid: &super::Grid) -> Vec<f64> {
        grid.points().map(|y| self.density(y)).collect()
    }

    /// Posterior component responsibilities r_i(y) = w_i N_i(y) / sum_j w_j N_j(y).
    pub fn responsibilities(&self, y: f64) -> Vec<f64> {
        let logs: Vec<f64> = self
            .weights
            .iter()
            .zip(&self.components)
            .map(|(w, c)| {
                if *w > 0.0 {
                    w.ln() + c.log_density(y)
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let unnorm: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
        let sum: f64 = unnorm.iter().sum();
        unnorm.iter().map(|u| u / sum).collect()
    }

    /// `n` i.i.d. draws: pick a component by weight, then draw from it.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.sample_one(rng).1).collect()
    }

    /// One draw, returning the chosen component index alongside the value.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, f64) {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut idx = self.components.len() - 1;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                idx = i;
                break;
            }
        }
        (idx, self.components[idx].sample(rng))
    }

    /// Probability mass outside `[lo, hi]`, weight-averaged over components.
    pub fn tail_mass_outside(&self, lo: f64, hi: f64) -> f64 {
        self.weights
            .iter()
            .zip(&self.components)
            .map(|(w, c)| w * c.tail_mass_outside(lo, hi))
            .sum()
    }
}
