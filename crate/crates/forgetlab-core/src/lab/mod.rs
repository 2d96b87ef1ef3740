//! Desk-scale discrete analog of LM post-training: synthetic verifiable
//! tasks, a shared-parameter softmax policy, six training procedures, and
//! exact (enumerated) evaluation of gain, drop, and KL diagnostics.
//!
//! The world is small enough that every accuracy and KL is computed exactly,
//! which turns the usual noisy benchmark comparisons into checkable
//! arithmetic. Forgetting is possible only because all prompts share one
//! weight matrix; per-prompt tables could not interfere.

mod closed_form;
mod data;
mod policy;
mod train;
mod world;

pub use closed_form::{analytic_optimal_policy, check_rl_identity, check_sft_identity};
pub use data::{build_expert_dataset, build_self_sft_dataset, Dataset, Example};
pub use policy::{accuracy, evaluate, AccuracyMode, EvalReport, LinearSoftmaxPolicy};
pub use train::{
    grpo_train, iterative_sft_train, pretrain_initial_policy, reinforce_train, sft_on_traces,
    sft_train, train_method, Method, PretrainConfig, TraceTuple, TrainOutcome, TrainSpec,
    TrainStatus,
};
pub use world::{make_world, World, WorldConfig};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid world config: {0}")]
    InvalidWorld(String),
    #[error("invalid train spec: {0}")]
    InvalidSpec(String),
    #[error("world setup failed: {0}")]
    Setup(String),
    #[error("empty task")]
    EmptyTask,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("numeric failure: {0}")]
    Numeric(String),
}

/// Splitmix64 finalizer; used to derive stable per-epoch/per-cell seeds.
pub(crate) fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
