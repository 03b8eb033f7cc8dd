// Copyright 2026 The rydberg-cz Contributors
// SPDX-License-Identifier: Apache-2.0

//! `rydcz`: batch front end for rydberg-cz.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 computation-level failure
//! (non-converged optimization, non-quadratic Stark fit, failed fit).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "rydcz", version, about = "Robust Rydberg CZ pulses and Rydberg-level properties")]
struct Cli {
    /// TOML run configuration (all keys optional, unknown keys rejected).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed for randomized initial guesses.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Omit the `# generated ...` line from written files.
    #[arg(long, global = true)]
    no_timestamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimize a pulse with multistart ALM and write it with a report.
    Optimize(OptimizeArgs),
    /// Evaluate a pulse file at one offset.
    Simulate(SimulateArgs),
    /// Fidelity on a grid of (dOmega, dDelta) offsets.
    Sweep(SweepArgs),
    /// Lifetimes of a Rydberg series with the 1/tau fit.
    Lifetime(LifetimeArgs),
    /// Stark map and polarisability of one level.
    Stark(StarkArgs),
    /// Fidelity of a fixed pulse across principal quantum numbers.
    Rank(RankArgs),
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// protocol-a, protocol-b or time-optimal-style.
    #[arg(long)]
    preset: Option<String>,
    /// Pulse file to write; the report goes next to it as `.report.txt`.
    #[arg(long)]
    out: PathBuf,
    /// Number of multistart seeds.
    #[arg(long)]
    starts: Option<usize>,
    /// Gate duration override (1/Omega_max).
    #[arg(long)]
    horizon: Option<f64>,
    /// Time-step count override.
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pulse: PathBuf,
    /// Rabi offset (Omega_max units).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    d_omega: f64,
    /// Detuning offset (Omega_max units).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    d_delta: f64,
    /// Switch Rydberg decay off.
    #[arg(long)]
    no_decay: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pulse: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// `lo:hi:count` or a comma list.
    #[arg(long, default_value = "-0.05:0.05:41", allow_hyphen_values = true)]
    omega_axis: String,
    /// `lo:hi:count` or a comma list.
    #[arg(long, default_value = "-0.02:0.02:41", allow_hyphen_values = true)]
    delta_axis: String,
}

#[derive(Debug, Args)]
pub struct LifetimeArgs {
    #[arg(long, default_value = "5sns 3S1")]
    series: String,
    #[arg(long, default_value_t = 40)]
    n_min: u32,
    #[arg(long, default_value_t = 120)]
    n_max: u32,
    /// Radiation temperature (K); defaults to the config value.
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct StarkArgs {
    #[arg(long)]
    n: u32,
    #[arg(long, default_value = "5sns 3S1")]
    series: String,
    /// Fields in V/m as `lo:hi:count` or a comma list; defaults to a
    /// quadratic-regime axis for the level.
    #[arg(long)]
    fields: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    /// Stray fields in mV/cm, comma separated; defaults to the config.
    #[arg(long)]
    fields: Option<String>,
    /// Pulse file; defaults to the bundled Protocol-A pulse.
    #[arg(long)]
    pulse: Option<PathBuf>,
    /// Reference level for the intersection field.
    #[arg(long, default_value_t = 61)]
    n_ref: u32,
    /// van-der-waals or fixed-ratio; defaults to the config.
    #[arg(long)]
    blockade: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

/// Options shared by every command.
pub struct Globals {
    pub config: config::RunConfig,
    pub seed: u64,
    pub timestamp: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} threads: {e}");
            return ExitCode::from(1);
        }
    }
    let config = match config::RunConfig::load(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let globals = Globals {
        config,
        seed: cli.seed,
        timestamp: !cli.no_timestamp,
    };
    let outcome = match cli.command {
        Command::Optimize(a) => commands::optimize(&globals, a),
        Command::Simulate(a) => commands::simulate(&globals, a),
        Command::Sweep(a) => commands::sweep(&globals, a),
        Command::Lifetime(a) => commands::lifetime(&globals, a),
        Command::Stark(a) => commands::stark(&globals, a),
        Command::Rank(a) => commands::rank(&globals, a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
