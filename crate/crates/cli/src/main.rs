use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use polaris_cli::{load_scenario, run, CliError, Mode};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    /// Write the trajectory CSV.
    Simulate,
    /// Write the outcome report.
    Predict,
    /// Simulate, predict and compare.
    Check,
}

/// Signed-network opinion dynamics: simulate, predict and check scenarios.
#[derive(Debug, Parser)]
#[command(name = "polaris", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,

    /// Scenario files (TOML).
    #[arg(required = true)]
    scenarios: Vec<PathBuf>,

    /// Number of scenarios to run concurrently.
    #[arg(short, long, default_value_t = 1)]
    jobs: usize,

    /// Directory receiving trajectories and reports.
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mode = match args.command {
        Command::Simulate => Mode::Simulate,
        Command::Predict => Mode::Predict,
        Command::Check => Mode::Check,
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(args.jobs.max(1)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    };
    let results: Vec<Result<_, CliError>> = pool.install(|| {
        args.scenarios
            .par_iter()
            .map(|path| load_scenario(path).and_then(|s| run(&s, mode, &args.out)))
            .collect()
    });

    let mut code = 0;
    for (path, result) in args.scenarios.iter().zip(results) {
        match result {
            Ok(outcome) => println!("ok   {}: {}", outcome.name, outcome.summary),
            Err(e) => {
                eprintln!("FAIL {}: {e}", path.display());
                code = code.max(e.exit_code());
            }
        }
    }
    ExitCode::from(code as u8)
}
