//! Experiment configuration: a single JSON document with lowercase_snake
//! keys. Unknown keys are hard errors; silent default-filling of typos is
//! the classic reproducibility bug.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use forgetlab_core::dynamics::{Objective, ReverseTarget, SimConfig};
use forgetlab_core::lab::{Method, PretrainConfig, TrainSpec, WorldConfig};
use forgetlab_core::mixture::Grid;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid value for \"{key}\": {what}")]
    Invalid { key: &'static str, what: String },
}

/// Which experiment family a config drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    SimUni,
    SimBi,
    SimSweep,
    Lab,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::SimUni => "sim_uni",
            ExperimentKind::SimBi => "sim_bi",
            ExperimentKind::SimSweep => "sim_sweep",
            ExperimentKind::Lab => "lab",
        }
    }
}

/// On-disk schema. Every field beyond `kind` and `seed`/`seeds` is optional
/// and falls back to the protocol defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub kind: ExperimentKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lab: Option<LabSection>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    /// Subset of {"forward_kl", "reverse_kl"}; both by default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objectives: Option<Vec<String>>,
    /// One learning rate applied to every listed objective; per-objective
    /// protocol defaults otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eval_every: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gain_stop: Option<f64>,
    /// "new_mode_only" (default) or "full_mixture".
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reverse_target: Option<String>,
    /// Sweep distances between the target's new mode and the policy's
    /// initial new mode; {4, 5, 6} by default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distances: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_lo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_hi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_prompts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_responses: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_non_target_tasks: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feature_dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pretrain_learning_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pretrain_min_accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pretrain_max_epochs: Option<usize>,
    /// Training cells; the calibrated default suite otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub methods: Option<Vec<MethodSection>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSection {
    pub method: String,
    /// Row label in outputs; the method name by default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_self: Option<usize>,
}

/// A fully validated experiment: every cell spec passes its own invariants
/// before any run starts.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seeds: Vec<u64>,
    pub output_dir: Option<String>,
    pub sim_cells: Vec<SimCell>,
    pub distances: Vec<f64>,
    pub lab: Option<LabPlan>,
    /// The parsed file echoed back for provenance.
    pub echo: ConfigFile,
}

/// One simulation objective with its learning rate; seeds multiply cells.
#[derive(Debug, Clone)]
pub struct SimCell {
    pub objective: Objective,
    pub template: SimConfig,
}

#[derive(Debug, Clone)]
pub struct LabPlan {
    pub world: WorldConfig,
    pub pretrain: PretrainConfig,
    pub methods: Vec<(String, TrainSpec)>,
}

/// Calibrated default method suite for the lab: the six procedures plus the
/// low-learning-rate SFT variant and the KL-free GRPO ablation.
pub fn default_lab_methods() -> Vec<(String, TrainSpec)> {
    let sft = |lr: f64| {
        TrainSpec::new(Method::Sft, 0)
            .with_lr(lr)
            .with_epochs(20)
    };
    vec![
        ("sft".into(), sft(1.0)),
        ("sft_low_lr".into(), sft(0.1)),
        (
            "self_sft".into(),
            TrainSpec::new(Method::SelfSft, 0).with_lr(1.0).with_epochs(20),
        ),
        (
            "iterative_sft".into(),
            TrainSpec::new(Method::IterativeSft, 0)
                .with_lr(1.0)
                .with_epochs(20),
        ),
        (
            "grpo".into(),
            TrainSpec::new(Method::Grpo, 0).with_lr(0.2).with_steps(200),
        ),
        (
            "grpo_beta0".into(),
            TrainSpec::new(Method::Grpo, 0)
                .with_lr(0.2)
                .with_steps(200)
                .with_beta(0.0),
        ),
        (
            "reinforce".into(),
            TrainSpec::new(Method::Reinforce, 0)
                .with_lr(0.2)
                .with_steps(200),
        ),
        (
            "sft_on_traces".into(),
            TrainSpec::new(Method::SftOnTraces, 0)
                .with_lr(0.1)
                .with_steps(200),
        ),
    ]
}

fn parse_method(name: &str) -> Result<Method, ConfigError> {
    Ok(match name {
        "sft" => Method::Sft,
        "self_sft" => Method::SelfSft,
        "iterative_sft" => Method::IterativeSft,
        "sft_on_traces" => Method::SftOnTraces,
        "reinforce" => Method::Reinforce,
        "grpo" => Method::Grpo,
        other => {
            return Err(ConfigError::Invalid {
                key: "method",
                what: format!("unknown method \"{other}\""),
            })
        }
    })
}

fn parse_objective(name: &str) -> Result<Objective, ConfigError> {
    Ok(match name {
        "forward_kl" => Objective::ForwardKl,
        "reverse_kl" => Objective::ReverseKl,
        other => {
            return Err(ConfigError::Invalid {
                key: "objectives",
                what: format!("unknown objective \"{other}\""),
            })
        }
    })
}

/// Protocol default learning rate per (kind, objective).
fn default_lr(kind: ExperimentKind, objective: Objective) -> f64 {
    match (kind, objective) {
        (ExperimentKind::SimUni, _) => 0.05,
        (ExperimentKind::SimBi, Objective::ForwardKl) => 0.15,
        (_, Objective::ReverseKl) => 0.01,
        (ExperimentKind::SimSweep, Objective::ForwardKl) => 0.15,
        (ExperimentKind::Lab, _) => unreachable!("lab has no sim objective"),
    }
}

/// Loads, parses, and fully validates a config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

/// Same as [`load_config`] from an in-memory document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let file: ConfigFile = serde_json::from_str(text)?;
    validate(file)
}

fn validate(file: ConfigFile) -> Result<ExperimentConfig, ConfigError> {
    let seeds: Vec<u64> = match (&file.seed, &file.seeds) {
        (Some(_), Some(_)) => {
            return Err(ConfigError::Invalid {
                key: "seeds",
                what: "give either \"seed\" or \"seeds\", not both".into(),
            })
        }
        (Some(s), None) => vec![*s],
        (None, Some(list)) => list.clone(),
        (None, None) => {
            return Err(ConfigError::Invalid {
                key: "seeds",
                what: "required (a \"seed\" or nonempty \"seeds\" list)".into(),
            })
        }
    };
    if seeds.is_empty() {
        return Err(ConfigError::Invalid {
            key: "seeds",
            what: "must be nonempty".into(),
        });
    }

    let mut cfg = ExperimentConfig {
        kind: file.kind,
        seeds,
        output_dir: file.output_dir.clone(),
        sim_cells: Vec::new(),
        distances: Vec::new(),
        lab: None,
        echo: file.clone(),
    };

    match file.kind {
        ExperimentKind::Lab => {
            if file.sim.is_some() {
                return Err(ConfigError::Invalid {
                    key: "sim",
                    what: "not allowed for kind \"lab\"".into(),
                });
            }
            let lab = file.lab.unwrap_or_default();
            let defaults = WorldConfig::default();
            let world = WorldConfig {
                n_prompts: lab.n_prompts.unwrap_or(defaults.n_prompts),
                n_responses: lab.n_responses.unwrap_or(defaults.n_responses),
                n_non_target_tasks: lab
                    .n_non_target_tasks
                    .unwrap_or(defaults.n_non_target_tasks),
                feature_dim: lab.feature_dim.unwrap_or(defaults.feature_dim),
                seed: 0, // overwritten per cell
            };
            let pre_defaults = PretrainConfig::default();
            let pretrain = PretrainConfig {
                learning_rate: lab
                    .pretrain_learning_rate
                    .unwrap_or(pre_defaults.learning_rate),
                min_accuracy: lab
                    .pretrain_min_accuracy
                    .unwrap_or(pre_defaults.min_accuracy),
                max_epochs: lab.pretrain_max_epochs.unwrap_or(pre_defaults.max_epochs),
            };
            if !(pretrain.learning_rate > 0.0) {
                return Err(ConfigError::Invalid {
                    key: "pretrain_learning_rate",
                    what: format!("must be positive, got {}", pretrain.learning_rate),
                });
            }
            let methods = match &lab.methods {
                None => default_lab_methods(),
                Some(list) => {
                    let mut out = Vec::with_capacity(list.len());
                    for section in list {
                        let method = parse_method(&section.method)?;
                        let defaults_for = default_lab_methods();
                        let base = defaults_for
                            .iter()
                            .find(|(_, spec)| spec.method == method)
                            .map(|(_, spec)| *spec)
                            .unwrap_or_else(|| TrainSpec::new(method, 0));
                        let mut spec = base;
                        spec.method = method;
                        if let Some(lr) = section.learning_rate {
                            if !(lr >= 0.0 && lr.is_finite()) {
                                return Err(ConfigError::Invalid {
                                    key: "learning_rate",
                                    what: format!("must be finite and >= 0, got {lr}"),
                                });
                            }
                            spec.learning_rate = lr;
                        }
                        if let Some(e) = section.epochs {
                            spec.epochs = e;
                        }
                        if let Some(s) = section.steps {
                            spec.steps = s;
                        }
                        if let Some(b) = section.batch_size {
                            spec.batch_size = b;
                        }
                        if let Some(g) = section.group_size {
                            spec.group_size = g;
                        }
                        if let Some(b) = section.beta {
                            spec.beta = b;
                        }
                        if let Some(k) = section.k_self {
                            spec.k_self = k;
                        }
                        spec.validate().map_err(|e| ConfigError::Invalid {
                            key: "methods",
                            what: e.to_string(),
                        })?;
                        let label = section.label.clone().unwrap_or_else(|| section.method.clone());
                        out.push((label, spec));
                    }
                    out
                }
            };
            cfg.lab = Some(LabPlan {
                world,
                pretrain,
                methods,
            });
        }
        kind => {
            if file.lab.is_some() {
                return Err(ConfigError::Invalid {
                    key: "lab",
                    what: format!("not allowed for kind \"{}\"", kind.name()),
                });
            }
            let sim = file.sim.unwrap_or_default();
            if let Some(lr) = sim.learning_rate {
                if !(lr >= 0.0 && lr.is_finite()) {
                    return Err(ConfigError::Invalid {
                        key: "learning_rate",
                        what: format!("must be finite and >= 0, got {lr}"),
                    });
                }
            }
            let grid = Grid::new(
                sim.grid_lo.unwrap_or(-12.0),
                sim.grid_hi.unwrap_or(12.0),
                sim.grid_points.unwrap_or(4001),
            )
            .map_err(|e| ConfigError::Invalid {
                key: "grid_lo",
                what: e.to_string(),
            })?;
            let reverse_target = match sim.reverse_target.as_deref() {
                None | Some("new_mode_only") => ReverseTarget::NewModeOnly,
                Some("full_mixture") => ReverseTarget::FullMixture,
                Some(other) => {
                    return Err(ConfigError::Invalid {
                        key: "reverse_target",
                        what: format!("unknown reverse target \"{other}\""),
                    })
                }
            };
            let objective_names = sim
                .objectives
                .clone()
                .unwrap_or_else(|| vec!["forward_kl".into(), "reverse_kl".into()]);
            if objective_names.is_empty() {
                return Err(ConfigError::Invalid {
                    key: "objectives",
                    what: "must be nonempty".into(),
                });
            }
            for name in &objective_names {
                let objective = parse_objective(name)?;
                let mut template = match kind {
                    ExperimentKind::SimUni => SimConfig::unimodal(objective, 0),
                    _ => SimConfig::bimodal(
                        objective,
                        default_lr(kind, objective),
                        0,
                    ),
                };
                template.learning_rate = sim
                    .learning_rate
                    .unwrap_or_else(|| default_lr(kind, objective));
                if let Some(n) = sim.n_samples {
                    template.n_samples = n;
                }
                if let Some(t) = sim.max_steps {
                    template.max_steps = t;
                }
                if let Some(e) = sim.eval_every {
                    template.eval_every = e;
                }
                if let Some(g) = sim.gain_stop {
                    template.gain_stop = g;
                }
                template.reverse_target = reverse_target;
                template.grid = grid;
                template.validate().map_err(|e| ConfigError::Invalid {
                    key: "sim",
                    what: e.to_string(),
                })?;
                cfg.sim_cells.push(SimCell {
                    objective,
                    template,
                });
            }
            cfg.distances = sim.distances.unwrap_or_else(|| vec![4.0, 5.0, 6.0]);
            if kind == ExperimentKind::SimSweep && cfg.distances.is_empty() {
                return Err(ConfigError::Invalid {
                    key: "distances",
                    what: "must be nonempty for sim_sweep".into(),
                });
            }
        }
    }
    Ok(cfg)
}

impl ExperimentConfig {
    /// Round-trippable serialized form of the echoed document.
    pub fn echo_json(&self) -> String {
        serde_json::to_string_pretty(&self.echo).expect("config serializes")
    }
}
