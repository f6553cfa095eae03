//! `fit-s21`: transmission-spectrum fit of one filter mode.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use purcell_core::spectrum::{
    auto_initial_guess, fit_s21, FitResult, S21ModelParams, SpectrumData,
};

use crate::config::{merge, read_input, required, write_output, write_resolved, Band, Format};
use crate::error::{CliError, CliResult};

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitArgs {
    /// Spectrum as `f_hz,s21_db` CSV or a two-port Touchstone file (.s2p)
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Fit only this band, in GHz
    #[arg(long)]
    pub window: Option<Band>,
    /// Number of readout-resonator dips in the window
    #[arg(long)]
    pub resonators: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// json
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl FitArgs {
    fn resolve(mut self) -> Self {
        self.resonators.get_or_insert(0);
        self.format.get_or_insert(Format::Json);
        self.out.get_or_insert_with(|| PathBuf::from("fit.json"));
        self
    }
}

#[derive(Debug, Serialize)]
struct FitReport<'a> {
    initial: &'a S21ModelParams,
    #[serde(flatten)]
    result: &'a FitResult,
}

fn is_touchstone(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .is_some_and(|e| e.len() >= 3 && e.starts_with('s') && e.ends_with('p'))
}

pub fn load_spectrum(path: &Path) -> CliResult<SpectrumData> {
    let text = read_input(path)?;
    let parsed = if is_touchstone(path) {
        SpectrumData::from_touchstone(&text)
    } else {
        SpectrumData::from_csv(&text)
    };
    parsed.map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn run_fit(flags: &FitArgs, config: Option<&Path>) -> CliResult<()> {
    let a = merge("fit-s21", flags, config)?.resolve();
    let out = a.out.clone().expect("resolved");
    if a.format != Some(Format::Json) {
        return Err(CliError::input("`fit-s21` writes --format json only"));
    }
    write_resolved("fit-s21", &a, &out)?;

    let mut data = load_spectrum(&required(a.data.clone(), "data")?)?;
    if let Some(w) = a.window {
        let (lo, hi) = w.hz();
        data = data.window(lo, hi)?;
    }
    let initial = auto_initial_guess(&data, a.resonators.expect("resolved"))?;
    let result = fit_s21(&data, &initial)?;
    let mut text = serde_json::to_string_pretty(&FitReport { initial: &initial, result: &result })?;
    text.push('\n');
    write_output(&out, &text)?;
    println!(
        "omega_f = {:.9e} Hz, kappa_f = {:.6e} Hz, rms = {:.4e} dB, converged = {}",
        result.params.omega_f, result.params.kappa_f, result.residual_rms, result.converged
    );
    if !result.converged {
        return Err(CliError::Numerical(format!(
            "fit did not converge after {} iterations; result written to {}",
            result.iterations,
            out.display()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn touchstone_is_recognised_by_extension() {
        assert!(is_touchstone(Path::new("a/b.s2p")));
        assert!(is_touchstone(Path::new("b.S2P")));
        assert!(!is_touchstone(Path::new("b.csv")));
        assert!(!is_touchstone(Path::new("b")));
    }
}
