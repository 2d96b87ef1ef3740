//! The six training procedures and the pretraining routine.
//!
//! All trainers are deterministic state machines over (W, seeded rng). The
//! SFT family descends cross-entropy on (prompt, response) pairs; REINFORCE
//! and GRPO do policy-gradient with an exact KL-to-init penalty, updating
//! right after each prompt's group is sampled.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::data::{build_expert_dataset, build_self_sft_dataset, Dataset};
use super::policy::{accuracy, evaluate, AccuracyMode, EvalReport, LinearSoftmaxPolicy};
use super::world::World;
use super::{mix_seed, LabError};

/// Which procedure a [`TrainSpec`] runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Sft,
    SelfSft,
    IterativeSft,
    SftOnTraces,
    Reinforce,
    Grpo,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Sft => "sft",
            Method::SelfSft => "self_sft",
            Method::IterativeSft => "iterative_sft",
            Method::SftOnTraces => "sft_on_traces",
            Method::Reinforce => "reinforce",
            Method::Grpo => "grpo",
        }
    }
}

/// Hyperparameters for one training run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainSpec {
    pub method: Method,
    pub learning_rate: f64,
    /// Passes over the dataset (SFT family).
    pub epochs: usize,
    /// Optimization steps (RL family); each step visits a full batch.
    pub steps: usize,
    /// Examples per SFT update.
    pub batch_size: usize,
    /// Prompts visited per RL step (capped at the target-task size).
    pub prompt_batch: usize,
    /// Responses sampled per prompt for REINFORCE/GRPO.
    pub group_size: usize,
    /// KL-penalty coefficient toward the initial policy.
    pub beta: f64,
    /// Self-SFT draws per prompt.
    pub k_self: usize,
    pub seed: u64,
}

impl TrainSpec {
    pub fn new(method: Method, seed: u64) -> Self {
        Self {
            method,
            learning_rate: 1.0,
            epochs: 2,
            steps: 200,
            batch_size: 1,
            prompt_batch: usize::MAX,
            group_size: 5,
            beta: 0.05,
            k_self: 5,
            seed,
        }
    }

    pub fn with_lr(mut self, lr: f64) -> Self {
        self.learning_rate = lr;
        self
    }

    pub fn with_epochs(mut self, epochs: usize) -> Self {
        self.epochs = epochs;
        self
    }

    pub fn with_steps(mut self, steps: usize) -> Self {
        self.steps = steps;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn validate(&self) -> Result<(), LabError> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(LabError::InvalidSpec(format!(
                "learning_rate must be finite and >= 0, got {}",
                self.learning_rate
            )));
        }
        if self.beta < 0.0 {
            return Err(LabError::InvalidSpec(format!(
                "beta must be >= 0, got {}",
                self.beta
            )));
        }
        if self.method == Method::Grpo && self.group_size < 2 {
            return Err(LabError::InvalidSpec(
                "grpo needs group_size >= 2 for a std-normalized advantage".into(),
            ));
        }
        if self.group_size == 0 || self.batch_size == 0 {
            return Err(LabError::InvalidSpec(
                "group_size and batch_size must be >= 1".into(),
            ));
        }
        if self.k_self == 0 {
            return Err(LabError::InvalidSpec("k_self must be >= 1".into()));
        }
        Ok(())
    }
}

/// Whether a run actually trained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainStatus {
    Completed,
    /// No usable training data; the policy is the untouched initial one.
    Skipped,
}

/// One sampled (prompt, response, reward) tuple from an RL run.
pub type TraceTuple = (usize, usize, f64);

/// Result of [`train_method`].
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub policy: LinearSoftmaxPolicy,
    pub status: TrainStatus,
    /// Per-epoch mean loss (SFT family) or per-step mean reward (RL family).
    pub trace: Vec<f64>,
    /// All sampled tuples, populated by GRPO runs.
    pub traces: Vec<TraceTuple>,
}

/// Pretraining knobs for building the initial policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PretrainConfig {
    pub learning_rate: f64,
    /// Stop once every non-target task reaches this exact accuracy. Kept
    /// above the contractual 0.9 so the pretrained margins are deep enough
    /// to survive later fine-tuning untouched.
    pub min_accuracy: f64,
    pub max_epochs: usize,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1.0,
            min_accuracy: 0.97,
            max_epochs: 8000,
        }
    }
}

/// Full-batch cross-entropy training on non-target prompts only, until every
/// non-target task accuracy clears the threshold. Fails if the cap is hit
/// first or if the target task did not stay near chance.
pub fn pretrain_initial_policy(
    world: &World,
    config: &PretrainConfig,
) -> Result<LinearSoftmaxPolicy, LabError> {
    let mut policy = LinearSoftmaxPolicy::uniform(world);
    let data: Dataset = world
        .non_target_tasks()
        .iter()
        .flatten()
        .map(|&x| (x, world.rewarded_response(x)))
        .collect();
    if data.is_empty() {
        // degenerate world with no non-target tasks: uniform policy stands
        return Ok(policy);
    }
    let mut reached = false;
    for _ in 0..config.max_epochs {
        ce_update(&mut policy, world, &data, config.learning_rate);
        let min_acc = world
            .non_target_tasks()
            .iter()
            .map(|t| accuracy(&policy, t, world, AccuracyMode::Exact).expect("nonempty"))
            .fold(f64::INFINITY, f64::min);
        if min_acc >= config.min_accuracy {
            reached = true;
            break;
        }
    }
    if !reached {
        return Err(LabError::Setup(format!(
            "pretraining did not reach accuracy {} within {} epochs; resize the world",
            config.min_accuracy, config.max_epochs
        )));
    }
    let chance_band = 2.0 / world.n_responses() as f64 + 0.1;
    let target_acc = accuracy(&policy, world.target_task(), world, AccuracyMode::Exact)?;
    if target_acc >= chance_band {
        return Err(LabError::Setup(format!(
            "pretrained target accuracy {target_acc:.3} is not near chance (< {chance_band:.3}); \
             the world leaves no headroom to measure gain"
        )));
    }
    Ok(policy)
}

/// Mean cross-entropy gradient step over `batch`; all per-example gradients
/// are taken at the incoming parameters before any of them is applied.
fn ce_update(policy: &mut LinearSoftmaxPolicy, world: &World, batch: &[(usize, usize)], lr: f64) {
    let scale = -lr / batch.len() as f64;
    let coeffs: Vec<(usize, Vec<f64>)> = batch
        .iter()
        .map(|&(x, y_star)| {
            let mut coeff = policy.probs(world, x);
            coeff[y_star] -= 1.0; // softmax CE gradient: p - onehot(y*)
            (x, coeff)
        })
        .collect();
    for (x, coeff) in coeffs {
        policy.add_outer(world, x, &coeff, scale);
    }
}

fn mean_ce_loss(policy: &LinearSoftmaxPolicy, world: &World, data: &[(usize, usize)]) -> f64 {
    let total: f64 = data
        .iter()
        .map(|&(x, y)| -policy.probs(world, x)[y].ln())
        .sum();
    total / data.len() as f64
}

/// Mini-batch gradient descent on mean -log pi(y|x) over the dataset.
/// Returns the trained policy and the per-epoch mean loss trace.
pub fn sft_train(
    policy: &LinearSoftmaxPolicy,
    dataset: &Dataset,
    world: &World,
    spec: &TrainSpec,
) -> Result<(LinearSoftmaxPolicy, Vec<f64>), LabError> {
    spec.validate()?;
    if dataset.is_empty() {
        return Err(LabError::EmptyDataset);
    }
    let mut policy = policy.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut losses = Vec::with_capacity(spec.epochs);
    for _ in 0..spec.epochs {
        let mut order: Vec<usize> = (0..dataset.len()).collect();
        order.shuffle(&mut rng);
        for chunk in order.chunks(spec.batch_size) {
            let batch: Vec<(usize, usize)> = chunk.iter().map(|&i| dataset[i]).collect();
            ce_update(&mut policy, world, &batch, spec.learning_rate);
        }
        if !policy.is_finite() {
            return Err(LabError::Numeric("NaN loss during sft_train".into()));
        }
        losses.push(mean_ce_loss(&policy, world, dataset));
    }
    Ok((policy, losses))
}

/// Regenerates a Self-SFT-style dataset from the *current* policy at the
/// start of each epoch, then runs one epoch of [`sft_train`] on it. Epochs
/// whose regenerated dataset is empty are skipped.
pub fn iterative_sft_train(
    policy: &LinearSoftmaxPolicy,
    world: &World,
    spec: &TrainSpec,
) -> Result<(LinearSoftmaxPolicy, Vec<EvalReport>), LabError> {
    spec.validate()?;
    let pi_0 = policy.clone();
    let mut current = policy.clone();
    let mut reports = Vec::with_capacity(spec.epochs);
    for epoch in 0..spec.epochs as u64 {
        let data = build_self_sft_dataset(&current, world, spec.k_self, mix_seed(spec.seed, 2 * epoch));
        if data.is_empty() {
            continue;
        }
        let mut epoch_spec = *spec;
        epoch_spec.epochs = 1;
        epoch_spec.seed = mix_seed(spec.seed, 2 * epoch + 1);
        let (next, _) = sft_train(&current, &data, world, &epoch_spec)?;
        current = next;
        reports.push(evaluate(&pi_0, &current, world)?);
    }
    Ok((current, reports))
}

fn rl_prompt_order<R: Rng>(world: &World, spec: &TrainSpec, rng: &mut R) -> Vec<usize> {
    let mut order: Vec<usize> = world.target_task().to_vec();
    order.shuffle(rng);
    order.truncate(spec.prompt_batch.min(order.len()));
    order
}

/// Exact gradient of KL[pi(.|x) || pi_0(.|x)] applied as `-lr * beta * grad`.
fn apply_kl_penalty(
    policy: &mut LinearSoftmaxPolicy,
    anchor: &LinearSoftmaxPolicy,
    world: &World,
    prompt: usize,
    lr_beta: f64,
) {
    if lr_beta == 0.0 {
        return;
    }
    let p = policy.probs(world, prompt);
    let p0 = anchor.probs(world, prompt);
    // entries with p = 0 contribute nothing; an anchor probability that
    // underflowed to zero is floored before the log
    let f: Vec<f64> = p
        .iter()
        .zip(&p0)
        .map(|(&a, &b)| {
            if a > 0.0 {
                a.ln() - b.max(1e-300).ln()
            } else {
                0.0
            }
        })
        .collect();
    let fbar: f64 = p.iter().zip(&f).map(|(&a, &b)| a * b).sum();
    let coeff: Vec<f64> = p.iter().zip(&f).map(|(&a, &b)| a * (b - fbar)).collect();
    policy.add_outer(world, prompt, &coeff, -lr_beta);
}

/// Group-standardized advantages with population std and epsilon 1e-8.
pub(crate) fn grpo_advantages(rewards: &[f64]) -> Vec<f64> {
    let n = rewards.len() as f64;
    let mean = rewards.iter().sum::<f64>() / n;
    let var = rewards.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
    let denom = var.sqrt() + 1e-8;
    rewards.iter().map(|r| (r - mean) / denom).collect()
}

fn policy_gradient_run(
    policy: &LinearSoftmaxPolicy,
    world: &World,
    spec: &TrainSpec,
    use_advantage: bool,
    collect_traces: bool,
) -> Result<(LinearSoftmaxPolicy, Vec<f64>, Vec<TraceTuple>), LabError> {
    spec.validate()?;
    let anchor = policy.clone();
    let mut policy = policy.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut reward_trace = Vec::with_capacity(spec.steps);
    let mut traces = Vec::new();
    let lr = spec.learning_rate;
    for _ in 0..spec.steps {
        let order = rl_prompt_order(world, spec, &mut rng);
        let mut step_reward = 0.0;
        let mut step_samples = 0usize;
        // updates are applied right after each prompt's group is sampled
        for &x in &order {
            let p = policy.probs(world, x);
            let mut ys = Vec::with_capacity(spec.group_size);
            let mut rs = Vec::with_capacity(spec.group_size);
            for _ in 0..spec.group_size {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut y = p.len() - 1;
                for (cand, pc) in p.iter().enumerate() {
                    acc += pc;
                    if u < acc {
                        y = cand;
                        break;
                    }
                }
                let r = world.reward(x, y);
                if collect_traces {
                    traces.push((x, y, r));
                }
                step_reward += r;
                step_samples += 1;
                ys.push(y);
                rs.push(r);
            }
            let weights = if use_advantage {
                grpo_advantages(&rs)
            } else {
                rs.clone()
            };
            if weights.iter().any(|&a| a != 0.0) {
                // mean over the group of a_i * grad log pi(y_i|x):
                // coeff[y] collects a_i (onehot - p) contributions
                let mut coeff = vec![0.0; world.n_responses()];
                let a_sum: f64 = weights.iter().sum();
                for (&y, &a) in ys.iter().zip(&weights) {
                    coeff[y] += a;
                }
                for (c, &py) in coeff.iter_mut().zip(&p) {
                    *c -= a_sum * py;
                }
                // ascent on the objective = descent on its negation
                policy.add_outer(world, x, &coeff, lr / spec.group_size as f64);
            }
            apply_kl_penalty(&mut policy, &anchor, world, x, lr * spec.beta);
        }
        if !policy.is_finite() {
            return Err(LabError::Numeric("NaN parameters during RL run".into()));
        }
        reward_trace.push(step_reward / step_samples.max(1) as f64);
    }
    Ok((policy, reward_trace, traces))
}

/// REINFORCE: raw rewards weight the log-probability gradients; no advantage
/// estimator. Shares the KL-penalty convention with GRPO.
pub fn reinforce_train(
    policy: &LinearSoftmaxPolicy,
    world: &World,
    spec: &TrainSpec,
) -> Result<(LinearSoftmaxPolicy, Vec<f64>), LabError> {
    let (policy, trace, _) = policy_gradient_run(policy, world, spec, false, false)?;
    Ok((policy, trace))
}

/// GRPO: group-standardized advantages, no ratio clipping, exact KL penalty,
/// updates applied immediately per prompt. Every sampled tuple is returned.
pub fn grpo_train(
    policy: &LinearSoftmaxPolicy,
    world: &World,
    spec: &TrainSpec,
) -> Result<(LinearSoftmaxPolicy, Vec<f64>, Vec<TraceTuple>), LabError> {
    policy_gradient_run(policy, world, spec, true, true)
}

/// Filters `traces` to reward-1 tuples and runs [`sft_train`] from a fresh
/// copy of the initial policy on them.
pub fn sft_on_traces(
    pi_0: &LinearSoftmaxPolicy,
    traces: &[TraceTuple],
    world: &World,
    spec: &TrainSpec,
) -> Result<(LinearSoftmaxPolicy, TrainStatus), LabError> {
    let dataset: Dataset = traces
        .iter()
        .filter(|(_, _, r)| *r > 0.0)
        .map(|&(x, y, _)| (x, y))
        .collect();
    if dataset.is_empty() {
        return Ok((pi_0.clone(), TrainStatus::Skipped));
    }
    let (policy, _) = sft_train(pi_0, &dataset, world, spec)?;
    Ok((policy, TrainStatus::Completed))
}

/// Runs one method end to end from the initial policy. This is the single
/// entry point the experiment runner uses.
pub fn train_method(
    pi_0: &LinearSoftmaxPolicy,
    world: &World,
    spec: &TrainSpec,
) -> Result<TrainOutcome, LabError> {
    spec.validate()?;
    let outcome = match spec.method {
        Method::Sft => {
            let data = build_expert_dataset(world);
            let (policy, trace) = sft_train(pi_0, &data, world, spec)?;
            TrainOutcome {
                policy,
                status: TrainStatus::Completed,
                trace,
                traces: Vec::new(),
            }
        }
        Method::SelfSft => {
            let data = build_self_sft_dataset(pi_0, world, spec.k_self, mix_seed(spec.seed, 0));
            if data.is_empty() {
                TrainOutcome {
                    policy: pi_0.clone(),
                    status: TrainStatus::Skipped,
                    trace: Vec::new(),
                    traces: Vec::new(),
                }
            } else {
                let mut inner = *spec;
                inner.seed = mix_seed(spec.seed, 1);
                let (policy, trace) = sft_train(pi_0, &data, world, &inner)?;
                TrainOutcome {
                    policy,
                    status: TrainStatus::Completed,
                    trace,
                    traces: Vec::new(),
                }
            }
        }
        Method::IterativeSft => {
            let (policy, reports) = iterative_sft_train(pi_0, world, spec)?;
            TrainOutcome {
                policy,
                status: TrainStatus::Completed,
                trace: reports.iter().map(|r| r.gain).collect(),
                traces: Vec::new(),
            }
        }
        Method::SftOnTraces => {
            // produce on-policy traces with a GRPO run, then distill them
            let mut rl_spec = *spec;
            rl_spec.method = Method::Grpo;
            rl_spec.learning_rate = 0.2;
            let (_, _, traces) = grpo_train(pi_0, world, &rl_spec)?;
            let mut sft_spec = *spec;
            sft_spec.epochs = 1;
            let (policy, status) = sft_on_traces(pi_0, &traces, world, &sft_spec)?;
            TrainOutcome {
                policy,
                status,
                trace: Vec::new(),
                traces,
            }
        }
        Method::Reinforce => {
            let (policy, trace) = reinforce_train(pi_0, world, spec)?;
            TrainOutcome {
                policy,
                status: TrainStatus::Completed,
                trace,
                traces: Vec::new(),
            }
        }
        Method::Grpo => {
            let (policy, trace, traces) = grpo_train(pi_0, world, spec)?;
            TrainOutcome {
                policy,
                status: TrainStatus::Completed,
                trace,
                traces,
            }
        }
    };
    Ok(outcome)
}
