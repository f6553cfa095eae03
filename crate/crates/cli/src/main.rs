//! `purcell`: sweeps, fits, reset schedules and readout analysis from the
//! command line.
//!
//! Exit codes: 0 success, 2 input error, 3 non-convergence or unreachable
//! target.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod error;
mod fit;
mod network;
mod readout;
mod reset;
mod svg;
mod synth;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliResult;

#[derive(Parser, Debug)]
#[command(name = "purcell", version, about = "Multi-mode Purcell filter toolkit")]
struct Cli {
    /// JSON file of parameters; flags given on the command line win
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// S21 of a netlist or filter geometry over a band
    Spectrum(network::SpectrumArgs),
    /// Purcell-limited lifetime T_p seen by the qubit over a band
    Tp(network::TpArgs),
    /// Fit the transmission model to a measured spectrum
    #[command(name = "fit-s21")]
    FitS21(fit::FitArgs),
    /// Reset dynamics
    #[command(subcommand)]
    Reset(reset::ResetCommand),
    /// Single-shot readout error analysis
    Readout(readout::ReadoutArgs),
    /// Seeded synthetic data
    #[command(subcommand)]
    Synth(synth::SynthCommand),
}

fn run(cli: Cli) -> CliResult<()> {
    let config = cli.config.as_deref();
    match &cli.command {
        Command::Spectrum(a) => network::run_spectrum(a, config),
        Command::Tp(a) => network::run_tp(a, config),
        Command::FitS21(a) => fit::run_fit(a, config),
        Command::Reset(c) => reset::run_reset(c, config),
        Command::Readout(a) => readout::run_readout(a, config),
        Command::Synth(c) => synth::run_synth(c, config),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::new().filter_level(log::LevelFilter::Warn).parse_default_env().init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
