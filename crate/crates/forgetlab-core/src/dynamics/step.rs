//! Single gradient-descent steps for the two KL directions.

use rand::Rng;

use super::gradient::{grad_log_density, GradRecord, PolicyParams};
use super::DynamicsError;
use crate::mixture::{GaussianComponent, GaussianMixture, DENSITY_FLOOR};

/// Per-step estimator bookkeeping.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    /// Samples whose target log-density hit the log floor (reverse KL only).
    pub clipped: u64,
}

/// One descent step on the Monte Carlo cross-entropy (1/n) sum -log pi(y)
/// with y drawn from the target's new mode.
pub fn forward_kl_step<R: Rng + ?Sized>(
    policy: &GaussianMixture,
    target_new_mode: &GaussianComponent,
    n: usize,
    lr: f64,
    rng: &mut R,
) -> Result<GaussianMixture, DynamicsError> {
    let mut params = PolicyParams::from_mixture(policy);
    forward_kl_step_params(&mut params, target_new_mode, n, lr, rng)?;
    if lr == 0.0 {
        return Ok(policy.clone());
    }
    Ok(params.to_mixture())
}

pub(crate) fn forward_kl_step_params<R: Rng + ?Sized>(
    params: &mut PolicyParams,
    target_new_mode: &GaussianComponent,
    n: usize,
    lr: f64,
    rng: &mut R,
) -> Result<(), DynamicsError> {
    let policy = params.to_mixture();
    let mut grad = GradRecord::zeros(policy.len());
    for _ in 0..n {
        let y = target_new_mode.sample(rng);
        // descending -log pi means stepping along -grad log pi
        grad.add_scaled(&grad_log_density(&policy, y), -1.0 / n as f64);
    }
    if !grad.is_finite() {
        return Err(DynamicsError::NonFiniteGradient);
    }
    params.descend(&grad, lr);
    Ok(())
}

/// One descent step on the score-function estimator of grad KL(pi || target):
/// (1/n) sum grad log pi(y) * (log pi(y) - log target(y) - b), with b the
/// batch-mean baseline of the log-ratio and y ~ pi.
pub fn reverse_kl_step<R: Rng + ?Sized, F: Fn(f64) -> f64>(
    policy: &GaussianMixture,
    target_log_density: F,
    n: usize,
    lr: f64,
    rng: &mut R,
) -> Result<(GaussianMixture, StepStats), DynamicsError> {
    let mut params = PolicyParams::from_mixture(policy);
    let stats = reverse_kl_step_params(&mut params, &target_log_density, n, lr, rng)?;
    if lr == 0.0 {
        return Ok((policy.clone(), stats));
    }
    Ok((params.to_mixture(), stats))
}

pub(crate) fn reverse_kl_step_params<R: Rng + ?Sized, F: Fn(f64) -> f64>(
    params: &mut PolicyParams,
    target_log_density: &F,
    n: usize,
    lr: f64,
    rng: &mut R,
) -> Result<StepStats, DynamicsError> {
    let policy = params.to_mixture();
    let log_floor = DENSITY_FLOOR.ln();
    let mut stats = StepStats::default();
    let mut ys = Vec::with_capacity(n);
    let mut ratios = Vec::with_capacity(n);
    for _ in 0..n {
        let (_, y) = policy.sample_one(rng);
        let lp = policy.log_density_unchecked(y);
        let mut lt = target_log_density(y);
        if lt < log_floor {
            lt = log_floor;
            stats.clipped += 1;
        }
        ys.push(y);
        ratios.push(lp - lt);
    }
    let baseline: f64 = ratios.iter().sum::<f64>() / n as f64;
    let mut grad = GradRecord::zeros(policy.len());
    for (y, f) in ys.iter().zip(&ratios) {
        grad.add_scaled(&grad_log_density(&policy, *y), (f - baseline) / n as f64);
    }
    if !grad.is_finite() {
        return Err(DynamicsError::NonFiniteGradient);
    }
    params.descend(&grad, lr);
    Ok(stats)
}
