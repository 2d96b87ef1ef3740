//! Deterministic CSV serialization of trajectories and lab evaluations.
//!
//! Numbers are rendered with 17 significant digits so every f64 round-trips
//! exactly; determinism is checkable with a byte diff.

use std::io::Write;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("refusing to emit an empty table")]
    Empty,
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

pub const SIM_HEADER: &str =
    "step,objective,lr,seed,alpha,mu_old,sigma_old,mu_new,sigma_new,s_old,s_new,gain,drop";
pub const LAB_HEADER: &str =
    "method,seed,epoch_or_step,target_acc,mean_nontarget_acc,gain,drop,kl_from_init,beta,group_size,lr";

/// One simulation-trajectory checkpoint row. Uni-modal runs leave `alpha`,
/// `mu_new`, and `sigma_new` as `None`, emitted as empty columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRow {
    pub step: usize,
    pub objective: String,
    pub lr: f64,
    pub seed: u64,
    pub alpha: Option<f64>,
    pub mu_old: f64,
    pub sigma_old: f64,
    pub mu_new: Option<f64>,
    pub sigma_new: Option<f64>,
    pub s_old: f64,
    pub s_new: f64,
    pub gain: f64,
    pub drop: f64,
}

/// One lab evaluation row.
#[derive(Debug, Clone, PartialEq)]
pub struct LabRow {
    pub method: String,
    pub seed: u64,
    pub epoch_or_step: usize,
    pub target_acc: f64,
    pub mean_nontarget_acc: f64,
    pub gain: f64,
    pub drop: f64,
    pub kl_from_init: f64,
    pub beta: f64,
    pub group_size: usize,
    pub lr: f64,
}

/// A table ready for emission, rows already in step order.
#[derive(Debug, Clone)]
pub enum CsvTable {
    Sim(Vec<SimRow>),
    Lab(Vec<LabRow>),
}

/// 17-significant-digit rendering; round-trips f64 exactly.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

impl CsvTable {
    pub fn to_string(&self) -> Result<String, CsvError> {
        let mut out = String::new();
        match self {
            CsvTable::Sim(rows) => {
                if rows.is_empty() {
                    return Err(CsvError::Empty);
                }
                out.push_str(SIM_HEADER);
                out.push('\n');
                for r in rows {
                    out.push_str(&format!(
                        "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                        r.step,
                        r.objective,
                        format_float(r.lr),
                        r.seed,
                        opt(r.alpha),
                        format_float(r.mu_old),
                        format_float(r.sigma_old),
                        opt(r.mu_new),
                        opt(r.sigma_new),
                        format_float(r.s_old),
                        format_float(r.s_new),
                        format_float(r.gain),
                        format_float(r.drop),
                    ));
                }
            }
            CsvTable::Lab(rows) => {
                if rows.is_empty() {
                    return Err(CsvError::Empty);
                }
                out.push_str(LAB_HEADER);
                out.push('\n');
                for r in rows {
                    out.push_str(&format!(
                        "{},{},{},{},{},{},{},{},{},{},{}\n",
                        r.method,
                        r.seed,
                        r.epoch_or_step,
                        format_float(r.target_acc),
                        format_float(r.mean_nontarget_acc),
                        format_float(r.gain),
                        format_float(r.drop),
                        format_float(r.kl_from_init),
                        format_float(r.beta),
                        r.group_size,
                        format_float(r.lr),
                    ));
                }
            }
        }
        Ok(out)
    }
}

/// Writes the table to `path`, creating parent directories.
pub fn emit_csv(table: &CsvTable, path: &Path) -> Result<(), CsvError> {
    let text = table.to_string()?;
    let write = || -> std::io::Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let mut f = std::fs::File::create(path)?;
        f.write_all(text.as_bytes())
    };
    write().map_err(|source| CsvError::Io {
        path: path.display().to_string(),
        source,
    })
}
