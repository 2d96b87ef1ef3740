//! Supervised datasets: expert labels and reward-filtered self-generations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::policy::LinearSoftmaxPolicy;
use super::world::World;

/// One (prompt, response) training pair.
pub type Example = (usize, usize);

/// Ordered list of training pairs; duplicates are meaningful.
pub type Dataset = Vec<Example>;

/// The oracle response for every target prompt, one pair each.
pub fn build_expert_dataset(world: &World) -> Dataset {
    world
        .target_task()
        .iter()
        .map(|&x| (x, world.rewarded_response(x)))
        .collect()
}

/// Draws `k` responses per target prompt from `pi_0` and keeps every
/// reward-1 draw (duplicates retained). Prompts with no correct draw are
/// absent; the result may be empty.
pub fn build_self_sft_dataset(
    pi_0: &LinearSoftmaxPolicy,
    world: &World,
    k: usize,
    seed: u64,
) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for &x in world.target_task() {
        for _ in 0..k {
            let y = pi_0.sample(world, x, &mut rng);
            if world.reward(x, y) > 0.0 {
                out.push((x, y));
            }
        }
    }
    out
}
