//! Command-line harness for the reca training engine.
//!
//! Exit codes: 0 success, 1 failed verification or a numeric blow-up,
//! 2 bad usage or config, 3 missing or malformed data.

mod commands;
mod config;
mod outdir;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use reca_core::Error;

#[derive(Parser)]
#[command(
    name = "reca",
    version,
    about = "Train and verify the ReCA parametric activation",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check analytic gradients against finite differences
    Gradcheck {
        /// Random (input, parameter) draws per component
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also print both derivative forms at x = 1, (0.5, 1, 1)
        #[arg(long)]
        erratum: bool,
        /// Write gradcheck.json and a manifest here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate f, f', f'' over a parameter grid
    Sweep {
        /// figure-1 (one exponent at a time) or figure-2 (beta = delta)
        #[arg(long)]
        preset: String,
        /// Fixed scale parameter for every curve
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a fixed random network over a 2-D input lattice
    Landscape {
        /// linear, relu, or reca[:alpha,beta,delta]
        #[arg(long)]
        activation: String,
        /// Seed for the shared network weights
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run seeded training from a config file
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Override a config key, e.g. --set epochs=5 (repeatable)
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train each activation in the config's list and summarize
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Measure parameter and step-time cost of one activation vs another
    Resources {
        #[arg(long, default_value = "mini-cnn")]
        preset: String,
        /// Input shape as CxHxW (or a flat extent)
        #[arg(long, default_value = "3x32x32")]
        input: String,
        #[arg(long, default_value_t = 10)]
        classes: usize,
        #[arg(long, default_value = "relu")]
        base: String,
        #[arg(long, default_value = "reca")]
        variant: String,
        /// Optimizer steps to time per function
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write resources.json and a manifest here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize an image dataset directory
    InspectData {
        /// cifar10 or cifar100
        #[arg(long)]
        dataset: String,
        /// Defaults to the RECA_DATA_DIR environment variable
        #[arg(long)]
        data_dir: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Gradcheck { trials, seed, erratum, out } => {
            commands::gradcheck::run(trials, seed, erratum, out.as_deref())
        }
        Command::Sweep { preset, alpha, out } => commands::sweep::run(&preset, alpha, &out),
        Command::Landscape { activation, seed, out } => {
            commands::landscape::run(&activation, seed, &out)
        }
        Command::Train { config, set, out } => commands::train::run(&config, &set, &out),
        Command::Compare { config, set, out } => commands::compare::run(&config, &set, &out),
        Command::Resources { preset, input, classes, base, variant, steps, seed, out } => {
            commands::resources::run(
                &preset,
                &input,
                classes,
                &base,
                &variant,
                steps,
                seed,
                out.as_deref(),
            )
        }
        Command::InspectData { dataset, data_dir } => commands::inspect::run(&dataset, data_dir),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Verification(_) | Error::NonFinite(_) => 1,
        Error::Config(_) | Error::Shape(_) | Error::Domain(_) => 2,
        Error::Data(_) | Error::Io { .. } => 3,
    }
}
