//! Randomized identity suite: checks that cross-entropy decomposes into
//! forward KL plus entropy, and that the KL-regularized RL objective equals
//! reverse KL to the closed-form optimal policy up to a constant.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use forgetlab_core::lab::{check_rl_identity, check_sft_identity};

pub const RESIDUAL_BOUND: f64 = 1e-10;

/// Outcome of the randomized suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityReport {
    pub trials: usize,
    pub max_sft_residual: f64,
    pub max_rl_residual: f64,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.max_sft_residual < RESIDUAL_BOUND && self.max_rl_residual < RESIDUAL_BOUND
    }
}

fn random_categorical<R: Rng>(rng: &mut R, v: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..v).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

/// Runs `trials` random tabular configurations through both identities.
pub fn run_identity_suite(trials: usize, seed: u64) -> IdentityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_sft = 0.0f64;
    let mut max_rl = 0.0f64;
    for _ in 0..trials {
        let v = rng.gen_range(2..=24);
        let pi_star = random_categorical(&mut rng, v);
        let pi_theta = random_categorical(&mut rng, v);
        let pi_0 = random_categorical(&mut rng, v);
        let reward: Vec<f64> = (0..v)
            .map(|_| if rng.gen::<bool>() { 1.0 } else { 0.0 })
            .collect();
        let beta = 10f64.powf(rng.gen_range(-2.0..1.0));
        max_sft = max_sft.max(check_sft_identity(&pi_star, &pi_theta));
        max_rl = max_rl.max(
            check_rl_identity(&pi_theta, &pi_0, &reward, beta)
                .expect("beta is positive"),
        );
    }
    IdentityReport {
        trials,
        max_sft_residual: max_sft,
        max_rl_residual: max_rl,
    }
}
