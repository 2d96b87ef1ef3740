//! Closed-form optimal policy of the KL-regularized objective and the two
//! exact identities connecting SFT/RL training to KL minimization.

use super::policy::categorical_kl;
use super::LabError;

/// pi*(y|x) = pi_0(y|x) exp(r(x,y)/beta) / Z(x), enumerated exactly per
/// prompt in log space.
pub fn analytic_optimal_policy(
    pi_0_rows: &[Vec<f64>],
    reward_rows: &[Vec<f64>],
    beta: f64,
) -> Result<Vec<Vec<f64>>, LabError> {
    if beta <= 0.0 {
        return Err(LabError::InvalidSpec(format!(
            "beta must be positive, got {beta}"
        )));
    }
    if pi_0_rows.len() != reward_rows.len() {
        return Err(LabError::InvalidSpec(
            "policy and reward tables differ in prompt count".into(),
        ));
    }
    let mut out = Vec::with_capacity(pi_0_rows.len());
    for (p0, r) in pi_0_rows.iter().zip(reward_rows) {
        if p0.len() != r.len() {
            return Err(LabError::InvalidSpec(
                "policy and reward rows differ in response count".into(),
            ));
        }
        out.push(optimal_row(p0, r, beta));
    }
    Ok(out)
}

fn optimal_row(p0: &[f64], r: &[f64], beta: f64) -> Vec<f64> {
    let logs: Vec<f64> = p0
        .iter()
        .zip(r)
        .map(|(&p, &rv)| p.ln() + rv / beta)
        .collect();
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let unnorm: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let z: f64 = unnorm.iter().sum();
    unnorm.into_iter().map(|u| u / z).collect()
}

/// Residual of the SFT identity on one prompt:
/// |CE(pi*, pi_theta) - (KL[pi* || pi_theta] + H(pi*))|, all terms exact.
pub fn check_sft_identity(pi_star: &[f64], pi_theta: &[f64]) -> f64 {
    let ce: f64 = pi_star
        .iter()
        .zip(pi_theta)
        .filter(|(&p, _)| p > 0.0)
        .map(|(&p, &q)| -p * q.ln())
        .sum();
    let kl = categorical_kl(pi_star, pi_theta);
    let entropy: f64 = pi_star
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum();
    (ce - (kl + entropy)).abs()
}

/// Residual of the RL identity on one prompt:
/// |J_RL - (-beta KL[pi_theta || pi*] + beta log Z)| with
/// J_RL = E_pi[r] - beta KL[pi_theta || pi_0] and pi* from
/// [`analytic_optimal_policy`].
pub fn check_rl_identity(
    pi_theta: &[f64],
    pi_0: &[f64],
    reward: &[f64],
    beta: f64,
) -> Result<f64, LabError> {
    if beta <= 0.0 {
        return Err(LabError::InvalidSpec(format!(
            "beta must be positive, got {beta}"
        )));
    }
    let pi_star = optimal_row(pi_0, reward, beta);
    let expected_reward: f64 = pi_theta.iter().zip(reward).map(|(&p, &r)| p * r).sum();
    let j_rl = expected_reward - beta * categorical_kl(pi_theta, pi_0);
    // log Z in a stable form
    let max = pi_0
        .iter()
        .zip(reward)
        .map(|(&p, &r)| p.ln() + r / beta)
        .fold(f64::NEG_INFINITY, f64::max);
    let log_z = max
        + pi_0
            .iter()
            .zip(reward)
            .map(|(&p, &r)| (p.ln() + r / beta - max).exp())
            .sum::<f64>()
            .ln();
    let rhs = -beta * categorical_kl(pi_theta, &pi_star) + beta * log_z;
    Ok((j_rl - rhs).abs())
}
