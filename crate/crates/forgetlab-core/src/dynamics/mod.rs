//! Sample-based gradient estimators for forward/reverse KL over Gaussian
//! mixture policies, and the simulation protocols built on them.
//!
//! Forward KL draws data from the target's new mode and descends the Monte
//! Carlo cross-entropy; reverse KL draws data from the training policy and
//! descends a score-function estimator with a batch-mean baseline. Policies
//! are parameterized by (weight logit, means, log-stds) so every update keeps
//! the mixture valid without projections.

mod gradient;
mod runs;
mod step;
mod trajectory;

pub use gradient::{grad_log_density, GradRecord, PolicyParams};
pub use runs::{run_bimodal, run_distance_sweep, run_unimodal, SweepPoint};
pub use step::{forward_kl_step, reverse_kl_step, StepStats};
pub use trajectory::{Checkpoint, Trajectory};

use crate::mixture::{GaussianComponent, GaussianMixture, Grid, MixtureError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Mixture(#[from] MixtureError),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("numeric failure at step {step}: {what}")]
    NumericFailure {
        step: usize,
        what: String,
        /// Trajectory up to the last good checkpoint.
        last_good: Box<Trajectory>,
    },
    #[error("non-finite gradient (all samples in underflow region)")]
    NonFiniteGradient,
}

/// Which KL direction a simulation optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    ForwardKl,
    ReverseKl,
}

/// Density the reverse-KL estimator measures the policy against.
///
/// Minimizing against the new mode alone makes the training policy migrate
/// toward the target task; the full two-mode mixture is kept available as a
/// switch for studying the stay-at-home alternative. `NewModeOnly` is the
/// default.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReverseTarget {
    NewModeOnly,
    FullMixture,
}

/// Full specification of one simulation run.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub policy_init: GaussianMixture,
    /// The full two-mode optimal policy (old, new) with weights (a*, 1-a*).
    pub target: GaussianMixture,
    pub objective: Objective,
    pub reverse_target: ReverseTarget,
    pub learning_rate: f64,
    pub n_samples: usize,
    pub max_steps: usize,
    pub eval_every: usize,
    pub gain_stop: f64,
    pub seed: u64,
    pub grid: Grid,
}

impl SimConfig {
    /// Protocol defaults shared by every run: n=1000 samples per step,
    /// at most 1000 steps, evaluation every 100 steps, stop at gain 0.9.
    pub fn new(
        policy_init: GaussianMixture,
        target: GaussianMixture,
        objective: Objective,
        learning_rate: f64,
        seed: u64,
    ) -> Result<Self, DynamicsError> {
        let cfg = Self {
            policy_init,
            target,
            objective,
            reverse_target: ReverseTarget::NewModeOnly,
            learning_rate,
            n_samples: 1000,
            max_steps: 1000,
            eval_every: 100,
            gain_stop: 0.9,
            seed,
            grid: Grid::default_sim(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The default target mixture 0.75 N(-3, 1) + 0.25 N(3.5, 0.7).
    pub fn default_target() -> GaussianMixture {
        GaussianMixture::two(
            0.75,
            GaussianComponent::new(-3.0, 1.0).expect("valid"),
            GaussianComponent::new(3.5, 0.7).expect("valid"),
        )
        .expect("valid")
    }

    /// Uni-modal protocol: policy starts as N(-3.2, 1), learning rate 0.05.
    pub fn unimodal(objective: Objective, seed: u64) -> Self {
        Self::new(
            GaussianMixture::single(-3.2, 1.0).expect("valid"),
            Self::default_target(),
            objective,
            0.05,
            seed,
        )
        .expect("defaults are valid")
    }

    /// Bi-modal protocol: policy starts as 0.75 N(-3.5, 1) + 0.25 N(0.5, 0.7).
    pub fn bimodal(objective: Objective, learning_rate: f64, seed: u64) -> Self {
        Self::new(
            GaussianMixture::two(
                0.75,
                GaussianComponent::new(-3.5, 1.0).expect("valid"),
                GaussianComponent::new(0.5, 0.7).expect("valid"),
            )
            .expect("valid"),
            Self::default_target(),
            objective,
            learning_rate,
            seed,
        )
        .expect("defaults are valid")
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if self.target.len() != 2 {
            return Err(DynamicsError::InvalidConfig(format!(
                "target must have exactly 2 components (old, new), got {}",
                self.target.len()
            )));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(DynamicsError::InvalidConfig(format!(
                "learning_rate must be finite and >= 0, got {}",
                self.learning_rate
            )));
        }
        if self.n_samples == 0 {
            return Err(DynamicsError::InvalidConfig(
                "n_samples must be >= 1".into(),
            ));
        }
        if self.eval_every == 0 {
            return Err(DynamicsError::InvalidConfig(
                "eval_every must be >= 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.gain_stop) {
            return Err(DynamicsError::InvalidConfig(format!(
                "gain_stop must lie in [0, 1], got {}",
                self.gain_stop
            )));
        }
        Ok(())
    }

    /// Old-mode weight of the target.
    pub fn alpha_star(&self) -> f64 {
        self.target.weights()[0]
    }

    pub(crate) fn old_mode(&self) -> &GaussianComponent {
        &self.target.components()[0]
    }

    pub(crate) fn new_mode(&self) -> &GaussianComponent {
        &self.target.components()[1]
    }
}
