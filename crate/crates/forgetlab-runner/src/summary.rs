//! Per-experiment summary document: echoed config, per-cell terminal
//! metrics, seed aggregates, and warning counters.

use serde::{Deserialize, Serialize};

/// Terminal metrics of one (spec, seed) cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellSummary {
    /// Objective or method label the cell ran.
    pub group: String,
    pub seed: u64,
    /// Derived per-cell seed actually passed to the run.
    pub cell_seed: u64,
    /// Sweep distance, when applicable.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance: Option<f64>,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub gain: f64,
    pub drop: f64,
    /// Steps or epochs actually executed.
    pub terminal_step: usize,
    pub warnings: u64,
    pub csv: String,
}

/// Mean and sample standard deviation of terminal gain/drop per group.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupAggregate {
    pub group: String,
    pub n: usize,
    pub gain_mean: f64,
    pub gain_std: f64,
    pub drop_mean: f64,
    pub drop_std: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    /// Echoed config for provenance.
    pub config: serde_json::Value,
    /// Stable content hash of the echoed config.
    pub config_hash: String,
    pub cells: Vec<CellSummary>,
    pub aggregates: Vec<GroupAggregate>,
    pub total_warnings: u64,
    pub failed_cells: usize,
    pub wall_clock_seconds: f64,
}

impl RunSummary {
    /// Order-independent aggregation: a pure fold over finished cells.
    pub fn aggregate(cells: &[CellSummary]) -> Vec<GroupAggregate> {
        let mut groups: Vec<String> = Vec::new();
        for c in cells {
            if !groups.contains(&c.group) {
                groups.push(c.group.clone());
            }
        }
        groups
            .into_iter()
            .map(|group| {
                let vals: Vec<(f64, f64)> = cells
                    .iter()
                    .filter(|c| c.group == group && c.ok)
                    .map(|c| (c.gain, c.drop))
                    .collect();
                let n = vals.len();
                let mean = |f: fn(&(f64, f64)) -> f64| {
                    if n == 0 {
                        0.0
                    } else {
                        vals.iter().map(f).sum::<f64>() / n as f64
                    }
                };
                let std = |f: fn(&(f64, f64)) -> f64, m: f64| {
                    if n < 2 {
                        0.0
                    } else {
                        (vals.iter().map(|v| (f(v) - m) * (f(v) - m)).sum::<f64>()
                            / (n - 1) as f64)
                            .sqrt()
                    }
                };
                let gain_mean = mean(|v| v.0);
                let drop_mean = mean(|v| v.1);
                GroupAggregate {
                    group,
                    n,
                    gain_mean,
                    gain_std: std(|v| v.0, gain_mean),
                    drop_mean,
                    drop_std: std(|v| v.1, drop_mean),
                }
            })
            .collect()
    }
}

/// FNV-1a over the config text; stable across runs and platforms.
pub fn stable_hash(text: &str) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}
