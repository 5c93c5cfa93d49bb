use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};

use aoi_cli::commands::{self, BudgetArg, SimulateArgs, SolveArgs};
use aoi_cli::presets::{self, ExperimentPreset, SimSettings};
use aoi_core::sim::Horizon;
use aoi_core::{Occupancy, Policy};

#[derive(Parser)]
#[command(name = "aoi", version, about = "Age-optimal access to a channel shared with a primary user")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal randomized threshold policy in closed form.
    #[command(group(ArgGroup::new("budget").required(true).args(["eta_s", "eta_p"])))]
    Solve {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        phi_s: f64,
        /// Collision budget per slot.
        #[arg(long)]
        eta_s: Option<f64>,
        /// Collision budget per busy-idle cycle.
        #[arg(long)]
        eta_p: Option<f64>,
        /// Also solve the constrained MDP numerically and compare.
        #[arg(long)]
        verify: bool,
        /// Age truncation used by --verify.
        #[arg(long, default_value_t = 200)]
        delta_max: u32,
        /// Directory for solve.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo run of a policy.
    #[command(group(ArgGroup::new("horizon").args(["slots", "cycles"])))]
    Simulate {
        /// `threshold:<gamma>`, `mixed:<gamma>,<mu>` or `bernoulli:<p0>`.
        #[arg(long)]
        policy: Policy,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        phi_s: f64,
        /// Number of slots (default 1000000).
        #[arg(long)]
        slots: Option<u64>,
        /// Number of busy-idle cycles instead of slots.
        #[arg(long)]
        cycles: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Independent replications.
        #[arg(long, default_value_t = 1)]
        reps: u64,
        /// Run replications on one thread.
        #[arg(long)]
        serial: bool,
        /// Channel state at time zero.
        #[arg(long, value_enum, default_value_t = InitialState::Idle)]
        initial: InitialState,
        /// Directory for simulate.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regenerate the CSV behind a figure or table.
    ///
    /// fig5 and fig7 sweep p_I from 0.50 to 0.95 in steps of 0.05; fig6 uses
    /// 21 log-spaced eta_s in [1e-4, 1e-2]; fig8 uses 25 log-spaced alpha in
    /// [0.001, 0.3] with p_I = 0.75. These grids are choices of this tool.
    Experiment {
        #[arg(value_enum)]
        preset: ExperimentPreset,
        #[arg(long)]
        out: PathBuf,
        /// Seed for presets that simulate.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Slots per simulated point.
        #[arg(long, default_value_t = 1_000_000)]
        slots: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum InitialState {
    Idle,
    Busy,
}

fn run(cli: Cli) -> anyhow::Result<String> {
    match cli.command {
        Command::Solve {
            alpha,
            beta,
            phi_s,
            eta_s,
            eta_p,
            verify,
            delta_max,
            out,
        } => {
            let budget = match (eta_s, eta_p) {
                (Some(v), None) => BudgetArg::Siot(v),
                (None, Some(v)) => BudgetArg::Pu(v),
                _ => unreachable!("clap enforces exactly one budget"),
            };
            let args = SolveArgs {
                alpha,
                beta,
                phi_s,
                budget,
                verify,
                delta_max,
            };
            commands::solve(&args, out.as_deref())
        }
        Command::Simulate {
            policy,
            alpha,
            beta,
            phi_s,
            slots,
            cycles,
            seed,
            reps,
            serial,
            initial,
            out,
        } => {
            let horizon = match cycles {
                Some(c) => Horizon::Cycles(c),
                None => Horizon::Slots(slots.unwrap_or(1_000_000)),
            };
            let args = SimulateArgs {
                alpha,
                beta,
                phi_s,
                policy,
                horizon,
                seed,
                reps,
                serial,
                initial: match initial {
                    InitialState::Idle => Occupancy::Idle,
                    InitialState::Busy => Occupancy::Busy,
                },
            };
            commands::simulate(&args, out.as_deref())
        }
        Command::Experiment {
            preset,
            out,
            seed,
            slots,
        } => {
            let path = presets::run(preset, &out, SimSettings { slots, seed })?;
            Ok(format!("wrote {}\n", path.display()))
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
