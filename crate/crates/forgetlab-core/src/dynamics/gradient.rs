//! Analytic gradients of mixture log-densities and the trainable
//! parameterization the simulations update.

use crate::mixture::{GaussianComponent, GaussianMixture};

/// Per-parameter partials of `log pi(y)` for one observation.
///
/// `weight_logits[i] = r_i - w_i` (softmax-logit partial via component
/// responsibilities), `means[i] = r_i (y - mu_i) / sigma_i^2`, and
/// `log_stds[i] = r_i ((y - mu_i)^2 / sigma_i^2 - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradRecord {
    pub weight_logits: Vec<f64>,
    pub means: Vec<f64>,
    pub log_stds: Vec<f64>,
}

impl GradRecord {
    pub fn zeros(k: usize) -> Self {
        Self {
            weight_logits: vec![0.0; k],
            means: vec![0.0; k],
            log_stds: vec![0.0; k],
        }
    }

    pub fn add_scaled(&mut self, other: &GradRecord, scale: f64) {
        for i in 0..self.means.len() {
            self.weight_logits[i] += scale * other.weight_logits[i];
            self.means[i] += scale * other.means[i];
            self.log_stds[i] += scale * other.log_stds[i];
        }
    }

    pub fn scale(&mut self, s: f64) {
        for i in 0..self.means.len() {
            self.weight_logits[i] *= s;
            self.means[i] *= s;
            self.log_stds[i] *= s;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.weight_logits
            .iter()
            .chain(&self.means)
            .chain(&self.log_stds)
            .all(|v| v.is_finite())
    }
}

/// Exact partials of `log pi(y)` with respect to weight logits, means, and
/// log standard deviations.
pub fn grad_log_density(m: &GaussianMixture, y: f64) -> GradRecord {
    let r = m.responsibilities(y);
    let k = m.len();
    let mut g = GradRecord::zeros(k);
    for i in 0..k {
        let c = &m.components()[i];
        let sd = c.std();
        let z = (y - c.mean()) / sd;
        g.weight_logits[i] = r[i] - m.weights()[i];
        g.means[i] = r[i] * z / sd;
        g.log_stds[i] = r[i] * (z * z - 1.0);
    }
    g
}

/// Trainable state of a simulation policy: a single sigmoid logit for the
/// two-component weight (absent for uni-modal policies), plus per-component
/// mean and log-std. Carried across steps so repeated logit/weight
/// conversions cannot drift.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    weight_logit: Option<f64>,
    means: Vec<f64>,
    log_stds: Vec<f64>,
}

impl PolicyParams {
    pub fn from_mixture(m: &GaussianMixture) -> Self {
        let weight_logit = if m.len() == 2 {
            let w = m.weights()[0];
            Some((w / (1.0 - w)).ln())
        } else {
            None
        };
        Self {
            weight_logit,
            means: m.components().iter().map(|c| c.mean()).collect(),
            log_stds: m.components().iter().map(|c| c.log_std()).collect(),
        }
    }

    pub fn to_mixture(&self) -> GaussianMixture {
        let comps: Vec<GaussianComponent> = self
            .means
            .iter()
            .zip(&self.log_stds)
            .map(|(&m, &s)| GaussianComponent::from_log_std(m, s))
            .collect();
        let weights = match self.weight_logit {
            Some(a) => {
                let w = sigmoid(a);
                vec![w, 1.0 - w]
            }
            None => vec![1.0],
        };
        GaussianMixture::new(weights, comps).expect("parameterization keeps the mixture valid")
    }

    pub fn weight_logit(&self) -> Option<f64> {
        self.weight_logit
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn log_stds(&self) -> &[f64] {
        &self.log_stds
    }

    pub fn is_finite(&self) -> bool {
        self.weight_logit.map(|a| a.is_finite()).unwrap_or(true)
            && self.means.iter().chain(&self.log_stds).all(|v| v.is_finite())
    }

    /// Nudges one mean; intended for finite-difference checks.
    pub fn perturb_mean(&mut self, i: usize, delta: f64) {
        self.means[i] += delta;
    }

    /// Nudges one log-std; intended for finite-difference checks.
    pub fn perturb_log_std(&mut self, i: usize, delta: f64) {
        self.log_stds[i] += delta;
    }

    /// Nudges the weight logit; intended for finite-difference checks.
    pub fn perturb_weight_logit(&mut self, delta: f64) {
        if let Some(a) = self.weight_logit.as_mut() {
            *a += delta;
        }
    }

    /// One plain gradient-descent step. The weight update uses the first
    /// component's logit partial, which equals the sigmoid-logit partial for
    /// two-component mixtures.
    pub fn descend(&mut self, grad: &GradRecord, lr: f64) {
        if let Some(a) = self.weight_logit.as_mut() {
            *a -= lr * grad.weight_logits[0];
        }
        for i in 0..self.means.len() {
            self.means[i] -= lr * grad.means[i];
            self.log_stds[i] -= lr * grad.log_stds[i];
        }
    }
}

fn sigmoid(a: f64) -> f64 {
    1.0 / (1.0 + (-a).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_gaussian_partials_at_peak() {
        let m = GaussianMixture::single(0.0, 1.0).unwrap();
        let g = grad_log_density(&m, 0.0);
        assert_eq!(g.means[0], 0.0);
        assert_eq!(g.log_stds[0], -1.0);
    }

    #[test]
    fn single_gaussian_partials_one_sigma_out() {
        let m = GaussianMixture::single(0.0, 1.0).unwrap();
        let g = grad_log_density(&m, 1.0);
        assert!((g.means[0] - 1.0).abs() < 1e-15);
        assert!(g.log_stds[0].abs() < 1e-15);
    }

    #[test]
    fn mixture_partials_match_finite_differences() {
        // central differences (h = 1e-5) on every coordinate at 5 points
        let m = GaussianMixture::two(
            0.6,
            GaussianComponent::new(-1.0, 0.8).unwrap(),
            GaussianComponent::new(2.0, 1.4).unwrap(),
        )
        .unwrap();
        let h = 1e-5;
        for y in [-2.5, -0.3, 0.9, 2.2, 4.1] {
            let g = grad_log_density(&m, y);
            let base = PolicyParams::from_mixture(&m);
            // means and log-stds
            for i in 0..2 {
                for (field, analytic) in [(0usize, g.means[i]), (1, g.log_stds[i])] {
                    let mut plus = base.clone();
                    let mut minus = base.clone();
                    if field == 0 {
                        plus.means[i] += h;
                        minus.means[i] -= h;
                    } else {
                        plus.log_stds[i] += h;
                        minus.log_stds[i] -= h;
                    }
                    let fd = (plus.to_mixture().log_density(y).unwrap()
                        - minus.to_mixture().log_density(y).unwrap())
                        / (2.0 * h);
                    let denom = analytic.abs().max(1e-3);
                    assert!(
                        ((fd - analytic) / denom).abs() < 1e-5,
                        "y={y} i={i} field={field}: fd={fd} analytic={analytic}"
                    );
                }
            }
            // sigmoid weight logit
            let mut plus = base.clone();
            let mut minus = base.clone();
            *plus.weight_logit.as_mut().unwrap() += h;
            *minus.weight_logit.as_mut().unwrap() -= h;
            let fd = (plus.to_mixture().log_density(y).unwrap()
                - minus.to_mixture().log_density(y).unwrap())
                / (2.0 * h);
            let analytic = g.weight_logits[0];
            assert!(
                ((fd - analytic) / analytic.abs().max(1e-3)).abs() < 1e-5,
                "y={y} logit: fd={fd} analytic={analytic}"
            );
        }
    }

    #[test]
    fn params_round_trip_preserves_components() {
        let m = GaussianMixture::two(
            0.75,
            GaussianComponent::new(-3.5, 1.0).unwrap(),
            GaussianComponent::new(0.5, 0.7).unwrap(),
        )
        .unwrap();
        let p = PolicyParams::from_mixture(&m);
        let back = p.to_mixture();
        for (a, b) in m.components().iter().zip(back.components()) {
            assert_eq!(a.mean(), b.mean());
            assert_eq!(a.log_std(), b.log_std());
        }
        assert!((back.weights()[0] - 0.75).abs() < 1e-12);
    }
}
