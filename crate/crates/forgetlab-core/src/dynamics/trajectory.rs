//! Per-checkpoint records of simulation state.

use super::gradient::PolicyParams;

/// State captured at one evaluation point.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub step: usize,
    pub params: PolicyParams,
    pub s_old: f64,
    pub s_new: f64,
    pub gain: f64,
    pub drop: f64,
}

/// Ordered checkpoints of one run: step 0, every `eval_every` steps, and the
/// terminal step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub checkpoints: Vec<Checkpoint>,
    /// Reverse-KL log-floor clip events accumulated over the whole run.
    pub clip_count: u64,
    /// Set when any overlap quadrature flagged mass outside the grid.
    pub tail_warnings: u64,
}

impl Trajectory {
    pub fn terminal(&self) -> &Checkpoint {
        self.checkpoints.last().expect("trajectory is never empty")
    }

    pub fn initial(&self) -> &Checkpoint {
        self.checkpoints.first().expect("trajectory is never empty")
    }

    /// Terminal gain.
    pub fn gain(&self) -> f64 {
        self.terminal().gain
    }

    /// Terminal drop.
    pub fn drop_value(&self) -> f64 {
        self.terminal().drop
    }

    pub fn steps(&self) -> usize {
        self.terminal().step
    }
}
