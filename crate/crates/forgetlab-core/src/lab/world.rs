//! Finite prompt/response world with binary rewards and frozen features.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::LabError;

/// Sizes and seed for world construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WorldConfig {
    pub n_prompts: usize,
    pub n_responses: usize,
    pub n_non_target_tasks: usize,
    pub feature_dim: usize,
    pub seed: u64,
}

impl Default for WorldConfig {
    /// Default lab geometry. The feature dimension leaves enough spare
    /// directions that on-policy training can raise target accuracy without
    /// mowing down the pretrained margins, while the shared weight matrix
    /// still couples tasks.
    fn default() -> Self {
        Self {
            n_prompts: 64,
            n_responses: 16,
            n_non_target_tasks: 4,
            feature_dim: 128,
            seed: 0,
        }
    }
}

/// Finite prompt/response space with one rewarded response per prompt and a
/// task partition: task 0 is the target, tasks 1..=M are non-target.
#[derive(Debug, Clone)]
pub struct World {
    config: WorldConfig,
    rewarded: Vec<usize>,
    tasks: Vec<Vec<usize>>,
    prompt_features: Vec<Vec<f64>>,
    response_features: Vec<Vec<f64>>,
}

/// Builds a deterministic world: rewarded responses drawn uniformly,
/// features Gaussian with variance 1/d, both frozen afterwards.
pub fn make_world(config: WorldConfig) -> Result<World, LabError> {
    let WorldConfig {
        n_prompts: p,
        n_responses: v,
        n_non_target_tasks: m,
        feature_dim: d,
        seed,
    } = config;
    if v < 2 {
        return Err(LabError::InvalidWorld(format!(
            "need at least 2 responses, got {v}"
        )));
    }
    if d == 0 {
        return Err(LabError::InvalidWorld("feature_dim must be positive".into()));
    }
    // every non-target task gets floor(P / (M+1)) prompts; the target task
    // receives the remainder and must be nonempty
    let base = p / (m + 1);
    if base == 0 || p - m * base == 0 {
        return Err(LabError::InvalidWorld(format!(
            "cannot partition {p} prompts into 1 target + {m} non-target tasks"
        )));
    }
    let target_size = p - m * base;
    let mut tasks = Vec::with_capacity(m + 1);
    tasks.push((0..target_size).collect::<Vec<_>>());
    for j in 0..m {
        let start = target_size + j * base;
        tasks.push((start..start + base).collect());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rewarded: Vec<usize> = (0..p).map(|_| rng.gen_range(0..v)).collect();
    let scale = 1.0 / (d as f64).sqrt();
    let mut draw_features = |count: usize| -> Vec<Vec<f64>> {
        (0..count)
            .map(|_| (0..d).map(|_| scale * standard_normal(&mut rng)).collect())
            .collect()
    };
    let prompt_features = draw_features(p);
    let response_features = draw_features(v);
    Ok(World {
        config,
        rewarded,
        tasks,
        prompt_features,
        response_features,
    })
}

pub(crate) fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

impl World {
    pub fn config(&self) -> &WorldConfig {
        &self.config
    }

    pub fn n_prompts(&self) -> usize {
        self.config.n_prompts
    }

    pub fn n_responses(&self) -> usize {
        self.config.n_responses
    }

    pub fn feature_dim(&self) -> usize {
        self.config.feature_dim
    }

    /// The single reward-1 response for a prompt.
    pub fn rewarded_response(&self, prompt: usize) -> usize {
        self.rewarded[prompt]
    }

    pub fn reward(&self, prompt: usize, response: usize) -> f64 {
        if self.rewarded[prompt] == response {
            1.0
        } else {
            0.0
        }
    }

    pub fn target_task(&self) -> &[usize] {
        &self.tasks[0]
    }

    pub fn non_target_tasks(&self) -> &[Vec<usize>] {
        &self.tasks[1..]
    }

    pub fn tasks(&self) -> &[Vec<usize>] {
        &self.tasks
    }

    pub fn prompt_features(&self, prompt: usize) -> &[f64] {
        &self.prompt_features[prompt]
    }

    pub fn response_features(&self, response: usize) -> &[f64] {
        &self.response_features[response]
    }
}
