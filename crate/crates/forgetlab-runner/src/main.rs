use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use forgetlab_runner::config::ExperimentKind;
use forgetlab_runner::{
    load_config, run_experiment, EXIT_CELL_FAILED, EXIT_CONFIG, EXIT_OK,
};

#[derive(Parser)]
#[command(name = "forgetlab", about = "Forward/reverse KL forgetting laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Continuous Gaussian-mixture simulations.
    Sim {
        #[command(subcommand)]
        which: SimCommand,
    },
    /// Discrete post-training lab.
    Lab {
        #[command(subcommand)]
        which: LabCommand,
    },
    /// Exact-identity verification suites.
    Check {
        #[command(subcommand)]
        which: CheckCommand,
    },
    /// Print the version.
    Version,
}

#[derive(Subcommand)]
enum SimCommand {
    /// Uni-modal protocol (single-Gaussian training policy).
    Uni(RunArgs),
    /// Bi-modal protocol (two-component training policy).
    Bi(RunArgs),
    /// Distance sweep over target positions.
    Sweep(RunArgs),
}

#[derive(Subcommand)]
enum LabCommand {
    /// Run the configured method suite.
    Run(RunArgs),
}

#[derive(Subcommand)]
enum CheckCommand {
    /// Run the SFT/RL identity suite; nonzero exit on any residual > 1e-10.
    Identities {
        /// Random tabular configurations to test.
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Path to the experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's output_dir.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated seed list; overrides the config's seeds.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
}

fn run(args: &RunArgs, expect: ExperimentKind) -> i32 {
    let mut cfg = match load_config(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return EXIT_CONFIG;
        }
    };
    if cfg.kind != expect {
        eprintln!(
            "config error: invalid value for \"kind\": config says \"{}\" but the command runs \"{}\"",
            cfg.kind.name(),
            expect.name()
        );
        return EXIT_CONFIG;
    }
    if let Some(seeds) = &args.seeds {
        if seeds.is_empty() {
            eprintln!("config error: invalid value for \"seeds\": must be nonempty");
            return EXIT_CONFIG;
        }
        cfg.seeds = seeds.clone();
    }
    match run_experiment(&cfg, args.out.as_deref()) {
        Ok(outcome) => {
            println!(
                "{} cells, {} failed, summary: {}",
                outcome.summary.cells.len(),
                outcome.summary.failed_cells,
                outcome.summary_path.display()
            );
            for agg in &outcome.summary.aggregates {
                println!(
                    "  {}: gain {:.4} +- {:.4}, drop {:.4} +- {:.4} (n={})",
                    agg.group, agg.gain_mean, agg.gain_std, agg.drop_mean, agg.drop_std, agg.n
                );
            }
            if outcome.any_failed {
                EXIT_CELL_FAILED
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CELL_FAILED
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Sim { which } => match which {
            SimCommand::Uni(args) => run(args, ExperimentKind::SimUni),
            SimCommand::Bi(args) => run(args, ExperimentKind::SimBi),
            SimCommand::Sweep(args) => run(args, ExperimentKind::SimSweep),
        },
        Command::Lab { which } => match which {
            LabCommand::Run(args) => run(args, ExperimentKind::Lab),
        },
        Command::Check { which } => match which {
            CheckCommand::Identities { trials, seed } => {
                let report = forgetlab_runner::identities::run_identity_suite(*trials, *seed);
                println!(
                    "identities over {} trials: max SFT residual {:.3e}, max RL residual {:.3e}",
                    report.trials, report.max_sft_residual, report.max_rl_residual
                );
                if report.passed() {
                    println!("ok");
                    EXIT_OK
                } else {
                    eprintln!("residual above 1e-10");
                    EXIT_CELL_FAILED
                }
            }
        },
        Command::Version => {
            println!("forgetlab {}", env!("CARGO_PKG_VERSION"));
            EXIT_OK
        }
    };
    ExitCode::from(code as u8)
}
