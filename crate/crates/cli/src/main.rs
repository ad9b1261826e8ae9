//! Command-line front end: training, evaluation, baseline comparison,
//! hyperparameter sweeps, importance ranking, and cycle inspection.
//!
//! Exit codes: 0 success, 2 config/parse errors, 3 io errors, 4 training
//! failures, 5 internal errors. Failures print a machine-readable class as
//! `error[CLASS]: message` on stderr.

use clap::{Args, Parser, Subcommand, ValueEnum};
use ems_core::config::load_experiment;
use ems_core::cycles::DriveCycle;
use ems_core::harness::{
    inspect_cycle, run_experiment, run_sensitivity_experiment, run_sweep_experiment, Overrides,
    RunMode,
};
use ems_core::report::{comparison_table, sweep_report_text};
use ems_core::sensitivity::SweepDimension;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "ems",
    version,
    about = "Multi-mode PHEV powertrain simulation and energy-management controller training"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the configured learning controllers, then evaluate every method
    Train(RunArgs),
    /// Evaluate from saved checkpoints without training
    Eval {
        #[command(flatten)]
        args: RunArgs,
        /// Directory holding the agent checkpoints of a previous train run
        #[arg(long)]
        from: PathBuf,
    },
    /// Evaluate only the non-learning controllers in the config
    Baseline(RunArgs),
    /// Run one hyperparameter sweep dimension
    Sweep {
        #[command(flatten)]
        args: RunArgs,
        #[arg(long, value_enum)]
        dimension: DimensionArg,
    },
    /// Run all sweep dimensions and rank their importance
    Sensitivity(RunArgs),
    /// Drive-cycle utilities
    Cycles {
        #[command(subcommand)]
        command: CyclesCommand,
    },
}

#[derive(Subcommand)]
enum CyclesCommand {
    /// Print statistics for a velocity trace file
    Inspect { file: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration file
    #[arg(long)]
    config: PathBuf,
    /// Replace the config's seed list with a single root seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory override
    #[arg(long)]
    out: Option<PathBuf>,
    /// Episode count override
    #[arg(long)]
    episodes: Option<u32>,
    /// Relevance ratio override for the hand-shaking scheme
    #[arg(long = "relevance-ratio")]
    relevance_ratio: Option<f64>,
    /// Initial SoC list override, comma separated
    #[arg(long = "initial-soc", value_delimiter = ',')]
    initial_soc: Option<Vec<f64>>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DimensionArg {
    CriticDepth,
    LearningRates,
    PolicyNoise,
}

impl From<DimensionArg> for SweepDimension {
    fn from(d: DimensionArg) -> Self {
        match d {
            DimensionArg::CriticDepth => SweepDimension::CriticDepth,
            DimensionArg::LearningRates => SweepDimension::LearningRates,
            DimensionArg::PolicyNoise => SweepDimension::PolicyNoise,
        }
    }
}

fn overrides(args: &RunArgs) -> Overrides {
    Overrides {
        seed: args.seed,
        episodes: args.episodes,
        relevance_ratio: args.relevance_ratio,
        initial_soc: args.initial_soc.clone(),
        out_dir: args.out.clone(),
    }
}

fn exit_code_for(class: &str) -> u8 {
    match class {
        "CONFIG" | "PARSE" => 2,
        "IO" => 3,
        "TRAINING" => 4,
        _ => 5,
    }
}

fn fail(class: &str, message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error[{class}]: {message}");
    ExitCode::from(exit_code_for(class))
}

fn run_comparison(args: &RunArgs, mode: RunMode, command: &str) -> ExitCode {
    let mut exp = match load_experiment(&args.config) {
        Ok(e) => e,
        Err(e) => return fail("CONFIG", e),
    };
    overrides(args).apply(&mut exp);
    match run_experiment(&exp, &mode, command) {
        Ok(artifacts) => {
            print!("{}", comparison_table(&artifacts.rows));
            println!(
                "# wrote {} files under {}",
                artifacts.files.len(),
                artifacts.out_dir.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => fail(e.class(), e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Train(args) => run_comparison(&args, RunMode::Train, "train"),
        Command::Eval { args, from } => {
            run_comparison(&args, RunMode::Eval { checkpoint_dir: from }, "eval")
        }
        Command::Baseline(args) => run_comparison(&args, RunMode::Baseline, "baseline"),
        Command::Sweep { args, dimension } => {
            let mut exp = match load_experiment(&args.config) {
                Ok(e) => e,
                Err(e) => return fail("CONFIG", e),
            };
            overrides(&args).apply(&mut exp);
            match run_sweep_experiment(&exp, dimension.into(), "sweep") {
                Ok(report) => {
                    print!("{}", sweep_report_text(&report));
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e.class(), e),
            }
        }
        Command::Sensitivity(args) => {
            let mut exp = match load_experiment(&args.config) {
                Ok(e) => e,
                Err(e) => return fail("CONFIG", e),
            };
            overrides(&args).apply(&mut exp);
            match run_sensitivity_experiment(&exp, "sensitivity") {
                Ok(reports) => {
                    for r in &reports {
                        print!("{}", sweep_report_text(r));
                        println!();
                    }
                    println!(
                        "# ranking written to {}",
                        exp.config.experiment.out_dir.join("importance_ranking.tsv").display()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e.class(), e),
            }
        }
        Command::Cycles { command } => match command {
            CyclesCommand::Inspect { file } => match DriveCycle::load(&file) {
                Ok(cycle) => {
                    print!("{}", inspect_cycle(&cycle));
                    ExitCode::SUCCESS
                }
                Err(e) => fail("PARSE", e),
            },
        },
    }
}
