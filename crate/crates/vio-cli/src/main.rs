//! `vio` — visual-inertial odometry simulator and constrained-solver CLI.

mod config;
mod report;
mod simulate;
mod solve;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "vio",
    about = "Monocular-vision + altimeter + inertial-distance odometry simulator",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate flights and run the odometer over each configured seed.
    Simulate {
        /// TOML configuration file (all fields optional; see README).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Use and enforce the reference scenario envelope
        /// (1200 m, 235 m/s, 1 h, published sensor error budget).
        #[arg(long)]
        paper_preset: bool,
        /// Single seed to run.
        #[arg(long, conflicts_with = "seeds")]
        seed: Option<u64>,
        /// Comma-separated list of seeds.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Flight duration in seconds (overrides config/preset).
        #[arg(long)]
        duration: Option<f64>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker pool size for fanning seeds out.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Minimize a serialized constrained problem (see README for the format).
    Solve {
        /// Problem file.
        problem: PathBuf,
        /// Strategy name: semi-implicit | penalty.
        #[arg(long, default_value = "semi-implicit")]
        method: String,
        /// Write the per-iteration trace CSV here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Aggregate run directories into a comparison table and report.csv.
    Report {
        /// Run directories produced by `simulate`.
        #[arg(required = true)]
        run_dirs: Vec<PathBuf>,
        /// Long-format CSV output path.
        #[arg(long, default_value = "report.csv")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate {
            config,
            paper_preset,
            seed,
            seeds,
            duration,
            out,
            jobs,
        } => {
            let overrides = config::Overrides {
                duration_s: duration,
                seeds: seed.map(|s| vec![s]).or(seeds),
                out_dir: out,
                jobs,
            };
            config::load(config.as_deref(), paper_preset, &overrides)
                .and_then(|resolved| simulate::cmd_simulate(&resolved))
        }
        Command::Solve {
            problem,
            method,
            trace,
        } => solve::cmd_solve(&problem, &method, trace.as_deref()),
        Command::Report { run_dirs, out } => report::cmd_report(&run_dirs, &out),
    };
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
