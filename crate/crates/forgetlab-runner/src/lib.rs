//! Experiment orchestration: config loading, cell execution across
//! seeds/methods/objectives, and deterministic CSV/JSON serialization.

pub mod config;
pub mod csv;
pub mod experiment;
pub mod identities;
pub mod summary;

pub use config::{load_config, ConfigError, ExperimentConfig, ExperimentKind};
pub use csv::{emit_csv, CsvTable, LabRow, SimRow};
pub use experiment::{run_experiment, ExperimentError, ExperimentOutcome};
pub use summary::{CellSummary, RunSummary};

/// Process exit codes: 0 success, 1 config rejected, 2 numeric cell failure.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_CELL_FAILED: i32 = 2;
