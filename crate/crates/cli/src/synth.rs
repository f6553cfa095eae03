//! `synth`: seeded synthetic spectra, reset curves and IQ shots.

use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use purcell_core::readout::IQShotSet;
use purcell_core::reset::curve_to_csv;
use purcell_core::synth::{
    mode_a_params, mode_b_params, reset_curve, spectrum, time_grid, window_grid, ReadoutGenerator,
};

use crate::config::{merge, write_output, write_resolved};
use crate::error::{CliError, CliResult};
use crate::reset::reference;

/// Seeds the bundled fixtures were generated with.
pub const SEED_MODE_A: u64 = 11;
pub const SEED_MODE_B: u64 = 12;
pub const SEED_RESET_EG: u64 = 21;
pub const SEED_RESET_FE: u64 = 22;
pub const SEED_SHOTS: u64 = 31;

#[derive(Subcommand, Debug, Clone)]
pub enum SynthCommand {
    /// Transmission spectrum of filter mode A or B with dB noise
    Spectrum(SynthSpectrumArgs),
    /// Noisy reset curve at the eg or fe reference parameters
    Reset(SynthResetArgs),
    /// Two-state IQ shots from the reference readout generator
    Shots(SynthShotsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    A,
    B,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthSpectrumArgs {
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Half-width of the window in linewidths
    #[arg(long)]
    pub half_widths: Option<f64>,
    /// Gaussian noise in dB
    #[arg(long)]
    pub noise_db: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthResetArgs {
    /// Reference parameter set: eg | fe
    #[arg(long)]
    pub preset: Option<String>,
    /// Sample spacing in seconds
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Additive Gaussian noise on p_e
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthShotsArgs {
    /// Shots per prepared state
    #[arg(long)]
    pub shots: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn finish<T: Serialize>(command: &str, resolved: &T, out: &Path, text: &str) -> CliResult<()> {
    write_resolved(command, resolved, out)?;
    write_output(out, text)?;
    println!("wrote {}", out.display());
    Ok(())
}

pub fn run_synth(cmd: &SynthCommand, config: Option<&Path>) -> CliResult<()> {
    match cmd {
        SynthCommand::Spectrum(flags) => {
            let mut a = merge("synth spectrum", flags, config)?;
            let mode = *a.mode.get_or_insert(Mode::A);
            let (params, seed, points) = match mode {
                Mode::A => (mode_a_params(), SEED_MODE_A, 801),
                Mode::B => (mode_b_params(), SEED_MODE_B, 2001),
            };
            let points = *a.points.get_or_insert(points);
            let half_widths = *a.half_widths.get_or_insert(10.0);
            let noise = *a.noise_db.get_or_insert(0.1);
            let seed = *a.seed.get_or_insert(seed);
            let name = match mode {
                Mode::A => "mode-a.csv",
                Mode::B => "mode-b.csv",
            };
            let out = a.out.get_or_insert_with(|| PathBuf::from(name)).clone();
            if points < 2 || !(half_widths > 0.0) || !(noise >= 0.0) {
                return Err(CliError::input(
                    "need --points >= 2, --half-widths > 0, --noise-db >= 0",
                ));
            }
            let data = spectrum(&params, &window_grid(&params, half_widths, points), noise, seed);
            finish("synth spectrum", &a, &out, &data.to_csv())
        }
        SynthCommand::Reset(flags) => {
            let mut a = merge("synth reset", flags, config)?;
            let preset = a.preset.get_or_insert_with(|| "eg".into()).clone();
            let params = reference(&preset)?;
            let dt = *a.dt.get_or_insert(1e-9);
            let points = *a.points.get_or_insert(2001);
            let noise = *a.noise.get_or_insert(0.005);
            let default_seed = if preset == "fe" { SEED_RESET_FE } else { SEED_RESET_EG };
            let seed = *a.seed.get_or_insert(default_seed);
            let out =
                a.out.get_or_insert_with(|| PathBuf::from(format!("reset-{preset}.csv"))).clone();
            if !(dt > 0.0) || !(noise >= 0.0) {
                return Err(CliError::input("need --dt > 0 and --noise >= 0"));
            }
            let t = time_grid(dt, points);
            let p = reset_curve(&params, &t, noise, seed);
            finish("synth reset", &a, &out, &curve_to_csv(&t, &p))
        }
        SynthCommand::Shots(flags) => {
            let mut a = merge("synth shots", flags, config)?;
            let n = *a.shots.get_or_insert(30000);
            let seed = *a.seed.get_or_insert(SEED_SHOTS);
            let out = a.out.get_or_insert_with(|| PathBuf::from("shots.csv")).clone();
            let shots = ReadoutGenerator::reference().shots(n, seed);
            finish("synth shots", &a, &out, &IQShotSet::new(shots).to_csv())
        }
    }
}
