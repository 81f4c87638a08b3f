#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

mod config;
mod error;
mod presets;
mod run;

use config::{ExperimentConfig, Mode};
use error::CliError;

/// Ergodic corrector experiments for small transaction costs.
#[derive(Debug, Parser)]
#[command(name = "corrector", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a config file or a built-in preset and write its artifacts.
    Solve {
        /// Path to a TOML config, or a preset name.
        target: String,
        /// Output directory (overrides `output.dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run the invariant suite; exit with status 5 if any check fails.
        #[arg(long)]
        check: bool,
        /// Monte-Carlo seed (overrides `validation.seed`).
        #[arg(long)]
        seed: Option<u64>,
        /// policy-iteration, discounted or both (overrides `solver.mode`).
        #[arg(long)]
        mode: Option<Mode>,
    },
    /// List the built-in presets.
    Presets,
    /// Print the one-asset closed-form solution.
    Oracle1d {
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Cost of moving cash into the asset.
        #[arg(long, default_value_t = 0.001)]
        l01: f64,
        /// Cost of moving the asset into cash.
        #[arg(long, default_value_t = 0.001)]
        l10: f64,
    },
}

fn load(target: &str) -> Result<ExperimentConfig, CliError> {
    let path = PathBuf::from(target);
    if path.is_file() {
        let text = std::fs::read_to_string(&path)?;
        ExperimentConfig::from_toml(&text, target)
    } else if presets::find(target).is_some() {
        ExperimentConfig::from_preset(target)
    } else {
        Err(CliError::Config(format!("`{target}` is neither a config file nor a preset (see `corrector presets`)")))
    }
}

fn init_threads() -> Result<(), CliError> {
    if let Ok(value) = std::env::var("CORRECTOR_THREADS") {
        let n: usize = value.parse().map_err(|_| CliError::Config(format!("CORRECTOR_THREADS must be an integer, got `{value}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Presets => {
            for p in presets::PRESETS {
                println!("{:<24} {}", p.name, p.about);
            }
        }
        Command::Oracle1d { sigma, alpha, l01, l10 } => {
            let s = corrector_core::solve_1d_closed_form(sigma, alpha, l01, l10)?;
            println!("a_bar={}", s.a_bar);
            println!("slope_shift={}", s.slope_shift);
            println!("rho_plus={}", s.rho_plus);
        }
        Command::Solve { target, out, check, seed, mode } => {
            init_threads()?;
            let mut config = load(&target)?;
            if let Some(seed) = seed {
                config.validation.seed = seed;
            }
            if let Some(mode) = mode {
                config.solver.mode = mode;
            }
            let out = out.unwrap_or_else(|| config.output.dir.clone());
            let start = Instant::now();
            let result = run::run(&config, &out, check);
            eprintln!("elapsed {:.2}s", start.elapsed().as_secs_f64());
            let report = result?;
            print!("{}", report.summary);
            for f in &report.files {
                eprintln!("wrote {}", f.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
