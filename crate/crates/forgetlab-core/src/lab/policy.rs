//! Shared-parameter linear-softmax policy and exact evaluation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::world::World;
use super::LabError;

/// Categorical policy pi(y|x) = softmax_y phi(x)^T W psi(y). The d-by-d
/// weight matrix is the only trainable state; sharing it across prompts is
/// what makes forgetting possible at all.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSoftmaxPolicy {
    w: Vec<f64>,
    dim: usize,
}

impl LinearSoftmaxPolicy {
    /// Zero-initialized policy: uniform over responses for every prompt.
    pub fn uniform(world: &World) -> Self {
        let d = world.feature_dim();
        Self {
            w: vec![0.0; d * d],
            dim: d,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.w
    }

    /// phi(x)^T W, the prompt embedding in response-feature space.
    fn project(&self, world: &World, prompt: usize) -> Vec<f64> {
        let d = self.dim;
        let phi = world.prompt_features(prompt);
        let mut u = vec![0.0; d];
        for i in 0..d {
            let pi = phi[i];
            if pi == 0.0 {
                continue;
            }
            let row = &self.w[i * d..(i + 1) * d];
            for (uj, wj) in u.iter_mut().zip(row) {
                *uj += pi * wj;
            }
        }
        u
    }

    pub fn logits(&self, world: &World, prompt: usize) -> Vec<f64> {
        let u = self.project(world, prompt);
        (0..world.n_responses())
            .map(|y| dot(&u, world.response_features(y)))
            .collect()
    }

    /// Response distribution for one prompt; sums to 1 within 1e-12.
    pub fn probs(&self, world: &World, prompt: usize) -> Vec<f64> {
        softmax(&self.logits(world, prompt))
    }

    pub fn sample<R: Rng + ?Sized>(&self, world: &World, prompt: usize, rng: &mut R) -> usize {
        let p = self.probs(world, prompt);
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (y, py) in p.iter().enumerate() {
            acc += py;
            if u < acc {
                return y;
            }
        }
        p.len() - 1
    }

    /// Accumulates `scale * phi(x) outer coeff_psi` into W, where
    /// `coeff_psi = sum_y coeff[y] * psi(y)`. Shared by all gradient paths.
    pub(crate) fn add_outer(&mut self, world: &World, prompt: usize, coeff: &[f64], scale: f64) {
        let d = self.dim;
        let mut cpsi = vec![0.0; d];
        for (y, &c) in coeff.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let psi = world.response_features(y);
            for (t, pt) in cpsi.iter_mut().zip(psi) {
                *t += c * pt;
            }
        }
        let phi = world.prompt_features(prompt);
        for i in 0..d {
            let f = scale * phi[i];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.w[i * d..(i + 1) * d];
            for (wj, cj) in row.iter_mut().zip(&cpsi) {
                *wj += f * cj;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.w.iter().all(|v| v.is_finite())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / sum).collect()
}

/// How accuracy is computed: analytically or by sampling responses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccuracyMode {
    /// (1/|task|) sum_x pi(y*(x)|x): the expected reward, no sampling noise.
    Exact,
    /// Draw n responses per prompt and average rewards.
    Sampled { n: usize, seed: u64 },
}

/// Task accuracy of a policy under the chosen mode.
pub fn accuracy(
    policy: &LinearSoftmaxPolicy,
    task: &[usize],
    world: &World,
    mode: AccuracyMode,
) -> Result<f64, LabError> {
    if task.is_empty() {
        return Err(LabError::EmptyTask);
    }
    match mode {
        AccuracyMode::Exact => {
            let total: f64 = task
                .iter()
                .map(|&x| policy.probs(world, x)[world.rewarded_response(x)])
                .sum();
            Ok(total / task.len() as f64)
        }
        AccuracyMode::Sampled { n, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut hits = 0usize;
            for &x in task {
                for _ in 0..n {
                    if policy.sample(world, x, &mut rng) == world.rewarded_response(x) {
                        hits += 1;
                    }
                }
            }
            Ok(hits as f64 / (n * task.len()) as f64)
        }
    }
}

/// Exact-mode evaluation of a trained policy against the initial one.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// Per-task accuracies of the initial policy (index 0 = target task).
    pub initial_acc: Vec<f64>,
    /// Per-task accuracies of the trained policy.
    pub final_acc: Vec<f64>,
    /// Target-task gain.
    pub gain: f64,
    /// Mean non-target drop; zero when the world has no non-target tasks.
    pub drop: f64,
    /// Mean over all prompts of KL[pi_0(.|x) || pi_T(.|x)].
    pub kl_from_init: f64,
}

/// Computes gain, drop, and the KL-from-init diagnostic, all exactly.
pub fn evaluate(
    pi_0: &LinearSoftmaxPolicy,
    pi_t: &LinearSoftmaxPolicy,
    world: &World,
) -> Result<EvalReport, LabError> {
    let mut initial_acc = Vec::with_capacity(world.tasks().len());
    let mut final_acc = Vec::with_capacity(world.tasks().len());
    for task in world.tasks() {
        initial_acc.push(accuracy(pi_0, task, world, AccuracyMode::Exact)?);
        final_acc.push(accuracy(pi_t, task, world, AccuracyMode::Exact)?);
    }
    let gain = final_acc[0] - initial_acc[0];
    let m = world.non_target_tasks().len();
    let drop = if m == 0 {
        0.0
    } else {
        (1..=m).map(|j| initial_acc[j] - final_acc[j]).sum::<f64>() / m as f64
    };
    let mut kl_sum = 0.0;
    for x in 0..world.n_prompts() {
        let p0 = pi_0.probs(world, x);
        let pt = pi_t.probs(world, x);
        kl_sum += categorical_kl(&p0, &pt);
    }
    Ok(EvalReport {
        initial_acc,
        final_acc,
        gain,
        drop,
        kl_from_init: kl_sum / world.n_prompts() as f64,
    })
}

pub(crate) fn categorical_kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&pv, _)| pv > 0.0)
        .map(|(&pv, &qv)| pv * (pv.ln() - qv.ln()))
        .sum()
}

/// Test-only saturated policy with pi(y*|x) exactly 1.0 in f64: solves for
/// the W whose logits are 50 * onehot(y*) on every prompt (needs P <= d).
#[cfg(test)]
pub(crate) fn oracle_policy(world: &World) -> LinearSoftmaxPolicy {
    pinned_logit_policy(world, |x| {
        let mut row = vec![0.0; world.n_responses()];
        row[world.rewarded_response(x)] = 50.0;
        row
    })
}

/// Test-only policy realizing arbitrary per-prompt logits through W.
/// Solves U Psi^T = L for prompt embeddings U, then Phi W = U for W, using
/// min-norm solutions through the feature Gram matrices.
#[cfg(test)]
pub(crate) fn pinned_logit_policy<F: Fn(usize) -> Vec<f64>>(
    world: &World,
    logits_for: F,
) -> LinearSoftmaxPolicy {
    let d = world.feature_dim();
    let p = world.n_prompts();
    let v = world.n_responses();
    assert!(p <= d && v <= d, "pinned logits need P <= d and V <= d");
    // embeddings[x] = L_x (Psi Psi^T)^{-1} Psi
    let psi_gram = gram(v, |a, b| {
        dot(world.response_features(a), world.response_features(b))
    });
    let mut embeddings = Vec::with_capacity(p);
    for x in 0..p {
        let coeffs = solve(&psi_gram, &logits_for(x));
        let mut u = vec![0.0; d];
        for (y, c) in coeffs.iter().enumerate() {
            for (t, &f) in u.iter_mut().zip(world.response_features(y)) {
                *t += c * f;
            }
        }
        embeddings.push(u);
    }
    // W = Phi^T (Phi Phi^T)^{-1} U, column by column
    let phi_gram = gram(p, |a, b| {
        dot(world.prompt_features(a), world.prompt_features(b))
    });
    let mut w = vec![0.0; d * d];
    for col in 0..d {
        let rhs: Vec<f64> = embeddings.iter().map(|u| u[col]).collect();
        let coeffs = solve(&phi_gram, &rhs);
        for (x, c) in coeffs.iter().enumerate() {
            let phi = world.prompt_features(x);
            for i in 0..d {
                w[i * d + col] += c * phi[i];
            }
        }
    }
    LinearSoftmaxPolicy { w, dim: d }
}

#[cfg(test)]
fn gram(n: usize, entry: impl Fn(usize, usize) -> f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| entry(i, j)).collect())
        .collect()
}

/// Gaussian elimination with partial pivoting; fine for the small Gram
/// systems tests build.
#[cfg(test)]
fn solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let mut r = row.clone();
            r.push(rhs);
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        let diag = m[col][col];
        assert!(diag.abs() > 1e-12, "singular Gram matrix in test oracle");
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = m[row][col] / diag;
            if factor == 0.0 {
                continue;
            }
            for k in col..=n {
                let upd = m[col][k] * factor;
                m[row][k] -= upd;
            }
        }
    }
    (0..n).map(|i| m[i][n] / m[i][i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::world::{make_world, WorldConfig};

    fn small_world() -> World {
        make_world(WorldConfig {
            n_prompts: 10,
            n_responses: 16,
            n_non_target_tasks: 4,
            feature_dim: 24,
            seed: 3,
        })
        .unwrap()
    }

    #[test]
    fn probabilities_sum_to_one() {
        let w = small_world();
        let pol = oracle_policy(&w);
        for x in 0..w.n_prompts() {
            let s: f64 = pol.probs(&w, x).iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_policy_accuracy_is_exactly_chance() {
        let w = small_world();
        let pol = LinearSoftmaxPolicy::uniform(&w);
        let acc = accuracy(&pol, w.target_task(), &w, AccuracyMode::Exact).unwrap();
        assert_eq!(acc, 1.0 / 16.0);
    }

    #[test]
    fn oracle_policy_accuracy_is_one() {
        let w = small_world();
        let pol = oracle_policy(&w);
        let all: Vec<usize> = (0..w.n_prompts()).collect();
        let acc = accuracy(&pol, &all, &w, AccuracyMode::Exact).unwrap();
        assert_eq!(acc, 1.0);
    }

    #[test]
    fn sampled_accuracy_agrees_with_exact() {
        let w = small_world();
        let mut pol = LinearSoftmaxPolicy::uniform(&w);
        // mild tilt so the distribution is not uniform
        let coeff: Vec<f64> = (0..w.n_responses()).map(|y| (y as f64) * 0.02).collect();
        pol.add_outer(&w, 0, &coeff, 1.0);
        let task = w.target_task();
        let exact = accuracy(&pol, task, &w, AccuracyMode::Exact).unwrap();
        let n = 1000;
        let sampled =
            accuracy(&pol, task, &w, AccuracyMode::Sampled { n, seed: 11 }).unwrap();
        let total = (n * task.len()) as f64;
        let sigma = (exact * (1.0 - exact) / total).sqrt();
        assert!(
            (sampled - exact).abs() < 3.0 * sigma + 1e-12,
            "sampled {sampled} vs exact {exact}"
        );
    }

    #[test]
    fn empty_task_rejected() {
        let w = small_world();
        let pol = LinearSoftmaxPolicy::uniform(&w);
        assert!(matches!(
            accuracy(&pol, &[], &w, AccuracyMode::Exact),
            Err(LabError::EmptyTask)
        ));
    }

    #[test]
    fn evaluate_identity_policy_is_all_zero() {
        let w = small_world();
        let pol = LinearSoftmaxPolicy::uniform(&w);
        let r = evaluate(&pol, &pol, &w).unwrap();
        assert_eq!(r.gain, 0.0);
        assert_eq!(r.drop, 0.0);
        assert_eq!(r.kl_from_init, 0.0);
    }

    #[test]
    fn evaluate_oracle_vs_uniform_arithmetic() {
        // gain = 1 - 1/16 = 0.9375 and every non-target "drop" is the
        // improvement -(1 - 1/16)
        let w = small_world();
        let uni = LinearSoftmaxPolicy::uniform(&w);
        let oracle = oracle_policy(&w);
        let r = evaluate(&uni, &oracle, &w).unwrap();
        assert!((r.gain - 0.9375).abs() < 1e-12);
        assert!((r.drop - (-0.9375)).abs() < 1e-12);
    }

    #[test]
    fn kl_from_init_matches_double_loop_oracle() {
        let w = small_world();
        let p0 = LinearSoftmaxPolicy::uniform(&w);
        let mut pt = LinearSoftmaxPolicy::uniform(&w);
        let coeff: Vec<f64> = (0..w.n_responses())
            .map(|y| ((y * 7 % 5) as f64 - 2.0) * 0.3)
            .collect();
        for x in 0..w.n_prompts() {
            pt.add_outer(&w, x, &coeff, 0.7);
        }
        let r = evaluate(&p0, &pt, &w).unwrap();
        // brute-force double loop
        let mut total = 0.0;
        for x in 0..w.n_prompts() {
            let a = p0.probs(&w, x);
            let b = pt.probs(&w, x);
            for y in 0..w.n_responses() {
                total += a[y] * (a[y].ln() - b[y].ln());
            }
        }
        total /= w.n_prompts() as f64;
        assert!((r.kl_from_init - total).abs() < 1e-12);
    }
}
