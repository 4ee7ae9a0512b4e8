mod args;
mod commands;
mod error;
mod input;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::{CliError, CliResult};

const THREADS_ENV: &str = "MEBK_THREADS";

fn configure_threads(flag: Option<usize>) -> CliResult<()> {
    let threads = match flag {
        Some(t) => Some(t),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::validation(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?,
            ),
            Err(_) => None,
        },
    };
    match threads {
        Some(0) => Err(CliError::validation("thread count must be positive")),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::validation(format!("cannot configure {t} threads: {e}"))),
        None => Ok(()),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads(cli.threads)?;
    match &cli.command {
        Command::Fit(a) => commands::run_fit(a),
        Command::Grid(a) => commands::run_grid(a),
        Command::Bandwidth(a) => commands::run_bandwidth(a),
        Command::Simulate(a) => commands::run_simulate(a),
        Command::Sweep(a) => commands::run_sweep(a),
        Command::Benchmark(a) => commands::run_benchmark(a),
        Command::Loglik(a) => commands::run_loglik(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // Usage errors exit 2, help and version 0.
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
