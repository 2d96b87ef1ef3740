//! The three simulation protocols: uni-modal, bi-modal, and the distance
//! sweep over target positions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::gradient::PolicyParams;
use super::step::{forward_kl_step_params, reverse_kl_step_params};
use super::trajectory::{Checkpoint, Trajectory};
use super::{DynamicsError, Objective, ReverseTarget, SimConfig};
use crate::mixture::{overlap_area, GaussianComponent, GaussianMixture};

/// Uni-modal protocol: the training policy is a single Gaussian covering the
/// target's old mode.
pub fn run_unimodal(cfg: &SimConfig) -> Result<Trajectory, DynamicsError> {
    if cfg.policy_init.len() != 1 {
        return Err(DynamicsError::InvalidConfig(format!(
            "uni-modal run needs a 1-component policy, got {}",
            cfg.policy_init.len()
        )));
    }
    run_sim(cfg)
}

/// Bi-modal protocol: the training policy is a two-component mixture with a
/// trainable weight logit.
pub fn run_bimodal(cfg: &SimConfig) -> Result<Trajectory, DynamicsError> {
    if cfg.policy_init.len() != 2 {
        return Err(DynamicsError::InvalidConfig(format!(
            "bi-modal run needs a 2-component policy, got {}",
            cfg.policy_init.len()
        )));
    }
    run_sim(cfg)
}

/// One sweep cell: the target's new-mode distance and the finished run.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub distance: f64,
    pub trajectory: Trajectory,
}

/// Re-positions the target's new mode so its mean sits `distance` away from
/// the policy's initial new-mode mean, then runs the bi-modal protocol once
/// per distance. Each cell reuses the base seed, so a distance equal to the
/// base geometry reproduces `run_bimodal` exactly.
pub fn run_distance_sweep(
    base_cfg: &SimConfig,
    distances: &[f64],
) -> Result<Vec<SweepPoint>, DynamicsError> {
    if distances.is_empty() {
        return Err(DynamicsError::InvalidConfig(
            "distance sweep needs at least one distance".into(),
        ));
    }
    if base_cfg.policy_init.len() != 2 {
        return Err(DynamicsError::InvalidConfig(
            "distance sweep runs the bi-modal protocol".into(),
        ));
    }
    let init_new_mean = base_cfg.policy_init.components()[1].mean();
    let base_new = base_cfg.new_mode();
    let direction = if base_new.mean() >= init_new_mean {
        1.0
    } else {
        -1.0
    };
    let mut out = Vec::with_capacity(distances.len());
    for &distance in distances {
        let mut cfg = base_cfg.clone();
        let moved = GaussianComponent::new(
            init_new_mean + direction * distance,
            base_new.std(),
        )
        .map_err(DynamicsError::Mixture)?;
        cfg.target = GaussianMixture::two(cfg.alpha_star(), *cfg.old_mode(), moved)
            .map_err(DynamicsError::Mixture)?;
        let trajectory = run_bimodal(&cfg)?;
        out.push(SweepPoint {
            distance,
            trajectory,
        });
    }
    Ok(out)
}

struct Evaluator<'a> {
    cfg: &'a SimConfig,
    s_old_0: f64,
    s_new_0: f64,
    tail_warnings: u64,
}

impl<'a> Evaluator<'a> {
    fn new(cfg: &'a SimConfig) -> Result<Self, DynamicsError> {
        let mut me = Self {
            cfg,
            s_old_0: 0.0,
            s_new_0: 0.0,
            tail_warnings: 0,
        };
        let (s_old, s_new) = me.overlaps(&cfg.policy_init)?;
        me.s_old_0 = s_old;
        me.s_new_0 = s_new;
        Ok(me)
    }

    fn overlaps(&mut self, policy: &GaussianMixture) -> Result<(f64, f64), DynamicsError> {
        let a = self.cfg.alpha_star();
        let old = overlap_area(a, self.cfg.old_mode(), policy, &self.cfg.grid)?;
        let new = overlap_area(1.0 - a, self.cfg.new_mode(), policy, &self.cfg.grid)?;
        if old.tail_warning || new.tail_warning {
            self.tail_warnings += 1;
        }
        Ok((old.value, new.value))
    }

    fn checkpoint(
        &mut self,
        step: usize,
        params: &PolicyParams,
    ) -> Result<Checkpoint, DynamicsError> {
        let (s_old, s_new) = self.overlaps(&params.to_mixture())?;
        Ok(Checkpoint {
            step,
            params: params.clone(),
            s_old,
            s_new,
            gain: s_new - self.s_new_0,
            drop: self.s_old_0 - s_old,
        })
    }
}

fn run_sim(cfg: &SimConfig) -> Result<Trajectory, DynamicsError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut evaluator = Evaluator::new(cfg)?;
    let mut params = PolicyParams::from_mixture(&cfg.policy_init);
    let mut traj = Trajectory::default();
    traj.checkpoints.push(evaluator.checkpoint(0, &params)?);
    if traj.checkpoints[0].gain >= cfg.gain_stop {
        traj.tail_warnings = evaluator.tail_warnings;
        return Ok(traj);
    }

    let target = cfg.target.clone();
    let new_mode = *cfg.new_mode();
    let reverse_log_density = move |y: f64| match cfg.reverse_target {
        ReverseTarget::NewModeOnly => new_mode.log_density(y),
        ReverseTarget::FullMixture => target.log_density_unchecked(y),
    };

    let mut step = 0usize;
    while step < cfg.max_steps {
        let result = match cfg.objective {
            Objective::ForwardKl => forward_kl_step_params(
                &mut params,
                cfg.new_mode(),
                cfg.n_samples,
                cfg.learning_rate,
                &mut rng,
            ),
            Objective::ReverseKl => reverse_kl_step_params(
                &mut params,
                &reverse_log_density,
                cfg.n_samples,
                cfg.learning_rate,
                &mut rng,
            )
            .map(|stats| {
                traj.clip_count += stats.clipped;
            }),
        };
        if let Err(e) = result {
            traj.tail_warnings = evaluator.tail_warnings;
            return Err(DynamicsError::NumericFailure {
                step,
                what: e.to_string(),
                last_good: Box::new(traj),
            });
        }
        step += 1;
        if !params.is_finite() {
            traj.tail_warnings = evaluator.tail_warnings;
            return Err(DynamicsError::NumericFailure {
                step,
                what: "policy parameters became non-finite".into(),
                last_good: Box::new(traj),
            });
        }
        // gain is checked only at the evaluation cadence, so runs may
        // overshoot gain_stop by up to eval_every steps
        let at_eval = step % cfg.eval_every == 0;
        let at_end = step == cfg.max_steps;
        if at_eval || at_end {
            let ck = evaluator.checkpoint(step, &params)?;
            let stop = ck.gain >= cfg.gain_stop;
            traj.checkpoints.push(ck);
            if stop {
                break;
            }
        }
    }
    traj.tail_warnings = evaluator.tail_warnings;
    Ok(traj)
}
