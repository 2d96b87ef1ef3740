//! Cell execution: every (spec x seed) cell runs independently, writes its
//! own trajectory CSV, and feeds one summary document.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use forgetlab_core::dynamics::{
    run_bimodal, run_distance_sweep, run_unimodal, Objective, SimConfig, Trajectory,
};
use forgetlab_core::lab::{
    evaluate, make_world, pretrain_initial_policy, train_method, Method, TrainStatus,
};
use crate::config::{ExperimentConfig, ExperimentKind, SimCell};
use crate::csv::{emit_csv, CsvTable, LabRow, SimRow};
use crate::summary::{stable_hash, CellSummary, RunSummary};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("output directory required (config \"output_dir\" or --out)")]
    NoOutputDir,
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] crate::csv::CsvError),
}

/// What a finished experiment produced.
#[derive(Debug)]
pub struct ExperimentOutcome {
    pub summary: RunSummary,
    pub summary_path: PathBuf,
    pub csv_paths: Vec<PathBuf>,
    /// True when at least one cell failed numerically (exit code 2).
    pub any_failed: bool,
}

/// Splitmix-style mix of the experiment seed with the cell-spec index, so adding
/// or reordering seeds never perturbs other cells.
fn cell_seed(seed: u64, spec_index: usize) -> u64 {
    mix(seed, spec_index as u64)
}

fn mix(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

struct CellResult {
    summary: CellSummary,
    table: Option<CsvTable>,
    path: PathBuf,
}

fn objective_name(o: Objective) -> &'static str {
    match o {
        Objective::ForwardKl => "forward_kl",
        Objective::ReverseKl => "reverse_kl",
    }
}

fn trajectory_rows(
    traj: &Trajectory,
    cfg: &SimConfig,
    seed: u64,
    bimodal: bool,
) -> Vec<SimRow> {
    traj.checkpoints
        .iter()
        .map(|ck| {
            let means = ck.params.means();
            let stds: Vec<f64> = ck.params.log_stds().iter().map(|s| s.exp()).collect();
            let alpha = ck
                .params
                .weight_logit()
                .map(|a| 1.0 / (1.0 + (-a).exp()));
            SimRow {
                step: ck.step,
                objective: objective_name(cfg.objective).to_string(),
                lr: cfg.learning_rate,
                seed,
                alpha,
                mu_old: means[0],
                sigma_old: stds[0],
                mu_new: bimodal.then(|| means[1]),
                sigma_new: bimodal.then(|| stds[1]),
                s_old: ck.s_old,
                s_new: ck.s_new,
                gain: ck.gain,
                drop: ck.drop,
            }
        })
        .collect()
}

fn run_sim_cell(
    kind: ExperimentKind,
    cell: &SimCell,
    spec_index: usize,
    seed: u64,
    distances: &[f64],
    out_dir: &Path,
) -> Vec<CellResult> {
    let group = objective_name(cell.objective).to_string();
    let mut cfg = cell.template.clone();
    cfg.seed = cell_seed(seed, spec_index);
    let bimodal = kind != ExperimentKind::SimUni;

    let finish = |cfg: &SimConfig,
                  result: Result<Trajectory, forgetlab_core::dynamics::DynamicsError>,
                  path: PathBuf,
                  distance: Option<f64>| {
        match result {
            Ok(traj) => {
                let term = traj.terminal();
                CellResult {
                    summary: CellSummary {
                        group: group.clone(),
                        seed,
                        cell_seed: cfg.seed,
                        distance,
                        ok: true,
                        error: None,
                        gain: term.gain,
                        drop: term.drop,
                        terminal_step: term.step,
                        warnings: traj.tail_warnings + traj.clip_count,
                        csv: path.file_name().unwrap().to_string_lossy().into_owned(),
                    },
                    table: Some(CsvTable::Sim(trajectory_rows(&traj, cfg, seed, bimodal))),
                    path,
                }
            }
            Err(e) => CellResult {
                summary: CellSummary {
                    group: group.clone(),
                    seed,
                    cell_seed: cfg.seed,
                    distance,
                    ok: false,
                    error: Some(e.to_string()),
                    gain: f64::NAN,
                    drop: f64::NAN,
                    terminal_step: 0,
                    warnings: 0,
                    csv: path.file_name().unwrap().to_string_lossy().into_owned(),
                },
                table: None,
                path,
            },
        }
    };

    match kind {
        ExperimentKind::SimUni => {
            let path = out_dir.join(format!("sim_uni_{group}_seed{seed}.csv"));
            vec![finish(&cfg, run_unimodal(&cfg), path, None)]
        }
        ExperimentKind::SimBi => {
            let path = out_dir.join(format!("sim_bi_{group}_seed{seed}.csv"));
            vec![finish(&cfg, run_bimodal(&cfg), path, None)]
        }
        ExperimentKind::SimSweep => match run_distance_sweep(&cfg, distances) {
            Ok(points) => points
                .into_iter()
                .map(|pt| {
                    let path = out_dir.join(format!(
                        "sim_sweep_{group}_d{:.1}_seed{seed}.csv",
                        pt.distance
                    ));
                    finish(&cfg, Ok(pt.trajectory), path, Some(pt.distance))
                })
                .collect(),
            Err(e) => {
                let path = out_dir.join(format!("sim_sweep_{group}_seed{seed}.csv"));
                vec![finish(&cfg, Err(e), path, None)]
            }
        },
        ExperimentKind::Lab => unreachable!("lab cells do not go through run_sim_cell"),
    }
}

fn run_lab_cell(
    plan: &crate::config::LabPlan,
    label: &str,
    spec_index: usize,
    seed: u64,
    out_dir: &Path,
) -> CellResult {
    let path = out_dir.join(format!("lab_{label}_seed{seed}.csv"));
    let derived = cell_seed(seed, spec_index);
    let mut world_cfg = plan.world;
    world_cfg.seed = seed; // one world per experiment seed, shared by methods
    let fail = |what: String| CellResult {
        summary: CellSummary {
            group: label.to_string(),
            seed,
            cell_seed: derived,
            distance: None,
            ok: false,
            error: Some(what),
            gain: f64::NAN,
            drop: f64::NAN,
            terminal_step: 0,
            warnings: 0,
            csv: path.file_name().unwrap().to_string_lossy().into_owned(),
        },
        table: None,
        path: path.clone(),
    };
    let world = match make_world(world_cfg) {
        Ok(w) => w,
        Err(e) => return fail(e.to_string()),
    };
    let pi_0 = match pretrain_initial_policy(&world, &plan.pretrain) {
        Ok(p) => p,
        Err(e) => return fail(e.to_string()),
    };
    let mut spec = plan
        .methods
        .iter()
        .find(|(l, _)| l == label)
        .expect("label comes from the plan")
        .1;
    spec.seed = derived;
    let outcome = match train_method(&pi_0, &world, &spec) {
        Ok(o) => o,
        Err(e) => return fail(e.to_string()),
    };
    let report = match evaluate(&pi_0, &outcome.policy, &world) {
        Ok(r) => r,
        Err(e) => return fail(e.to_string()),
    };
    let epoch_or_step = match spec.method {
        Method::Reinforce | Method::Grpo => spec.steps,
        _ => spec.epochs,
    };
    let mean_nontarget = if report.final_acc.len() > 1 {
        report.final_acc[1..].iter().sum::<f64>() / (report.final_acc.len() - 1) as f64
    } else {
        0.0
    };
    let row = LabRow {
        method: label.to_string(),
        seed,
        epoch_or_step,
        target_acc: report.final_acc[0],
        mean_nontarget_acc: mean_nontarget,
        gain: report.gain,
        drop: report.drop,
        kl_from_init: report.kl_from_init,
        beta: spec.beta,
        group_size: spec.group_size,
        lr: spec.learning_rate,
    };
    CellResult {
        summary: CellSummary {
            group: label.to_string(),
            seed,
            cell_seed: derived,
            distance: None,
            ok: true,
            error: None,
            gain: report.gain,
            drop: report.drop,
            terminal_step: epoch_or_step,
            warnings: u64::from(outcome.status == TrainStatus::Skipped),
            csv: path.file_name().unwrap().to_string_lossy().into_owned(),
        },
        table: Some(CsvTable::Lab(vec![row])),
        path,
    }
}

/// Executes every (spec x seed) cell, writes one CSV per cell plus one
/// summary JSON. Independent cells run on a worker pool; the summary fold is
/// order-independent and cells never share mutable state.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    out_override: Option<&Path>,
) -> Result<ExperimentOutcome, ExperimentError> {
    let started = Instant::now();
    let out_dir: PathBuf = match out_override {
        Some(p) => p.to_path_buf(),
        None => cfg
            .output_dir
            .as_ref()
            .map(PathBuf::from)
            .ok_or(ExperimentError::NoOutputDir)?,
    };
    std::fs::create_dir_all(&out_dir).map_err(|source| ExperimentError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;

    // enumerate cells in a deterministic order
    let mut results: Vec<CellResult> = match cfg.kind {
        ExperimentKind::Lab => {
            let plan = cfg.lab.as_ref().expect("validated lab config");
            let jobs: Vec<(usize, String, u64)> = plan
                .methods
                .iter()
                .enumerate()
                .flat_map(|(i, (label, _))| {
                    cfg.seeds.iter().map(move |&s| (i, label.clone(), s))
                })
                .collect();
            jobs.par_iter()
                .map(|(i, label, seed)| run_lab_cell(plan, label, *i, *seed, &out_dir))
                .collect()
        }
        kind => {
            let jobs: Vec<(usize, &SimCell, u64)> = cfg
                .sim_cells
                .iter()
                .enumerate()
                .flat_map(|(i, cell)| cfg.seeds.iter().map(move |&s| (i, cell, s)))
                .collect();
            jobs.par_iter()
                .flat_map(|(i, cell, seed)| {
                    run_sim_cell(kind, cell, *i, *seed, &cfg.distances, &out_dir)
                })
                .collect()
        }
    };
    // deterministic file and summary order regardless of scheduling
    results.sort_by(|a, b| a.path.cmp(&b.path));

    let mut csv_paths = Vec::new();
    for r in &results {
        if let Some(table) = &r.table {
            emit_csv(table, &r.path)?;
            csv_paths.push(r.path.clone());
        }
    }
    let cells: Vec<CellSummary> = results.into_iter().map(|r| r.summary).collect();
    let failed = cells.iter().filter(|c| !c.ok).count();
    let total_warnings = cells.iter().map(|c| c.warnings).sum();
    let echo = cfg.echo_json();
    let summary = RunSummary {
        config: serde_json::from_str(&echo).expect("echo is valid json"),
        config_hash: stable_hash(&echo),
        aggregates: RunSummary::aggregate(&cells),
        cells,
        total_warnings,
        failed_cells: failed,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    let summary_path = out_dir.join("summary.json");
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    std::fs::write(&summary_path, text).map_err(|source| ExperimentError::Io {
        path: summary_path.display().to_string(),
        source,
    })?;
    Ok(ExperimentOutcome {
        any_failed: failed > 0,
        summary,
        summary_path,
        csv_paths,
    })
}
