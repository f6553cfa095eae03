//! `reset`: evaluate, fit, cascade and leakage-reduction schedules.

use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use serde::{Deserialize, Serialize};

use purcell_core::reset::{
    cascade_evaluate, curve_from_csv, curve_to_csv, fit_reset_curve, residual_curve,
    time_to_threshold, CascadeOutcome, CascadeSchedule, Level, Populations, QubitParams,
    ResetParams,
};

use crate::config::{merge, read_input, required, write_output, write_resolved, Format};
use crate::error::{CliError, CliResult};
use crate::svg::{line_plot, Series};

#[derive(Subcommand, Debug, Clone)]
pub enum ResetCommand {
    /// Residual excitation curve of one reset stage
    Evaluate(EvaluateArgs),
    /// Fit g, kappa and the floor to a measured curve
    Fit(CurveFitArgs),
    /// f→e then e→g reset
    Cascade(CascadeArgs),
    /// f→e stage only (leakage reduction)
    Lru(CascadeArgs),
}

pub fn reference(name: &str) -> CliResult<ResetParams> {
    match name {
        "eg" => Ok(ResetParams::reference_eg()),
        "fe" => Ok(ResetParams::reference_fe()),
        other => {
            Err(CliError::input(format!("unknown reset preset `{other}` (available: eg, fe)")))
        }
    }
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluateArgs {
    /// Reference parameter set: eg | fe
    #[arg(long)]
    pub preset: Option<String>,
    /// Qubit–mode coupling in Hz
    #[arg(long)]
    pub g_qf: Option<f64>,
    /// Mode linewidth in Hz
    #[arg(long)]
    pub kappa_f: Option<f64>,
    /// Steady-state excitation floor
    #[arg(long)]
    pub floor: Option<f64>,
    /// Curve length in seconds
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Report when the excitation last drops below this level
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv | svg
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl EvaluateArgs {
    fn resolve(mut self) -> CliResult<Self> {
        let base = reference(self.preset.get_or_insert_with(|| "eg".into()))?;
        self.g_qf.get_or_insert(base.g_qf);
        self.kappa_f.get_or_insert(base.kappa_f);
        self.floor.get_or_insert(base.p_exc_ss);
        self.t_max.get_or_insert(600e-9);
        self.points.get_or_insert(601);
        self.format.get_or_insert(Format::Csv);
        let ext = if self.format == Some(Format::Svg) { "svg" } else { "csv" };
        self.out.get_or_insert_with(|| PathBuf::from(format!("reset.{ext}")));
        Ok(self)
    }

    fn params(&self) -> CliResult<ResetParams> {
        Ok(ResetParams::new(
            self.g_qf.expect("resolved"),
            self.kappa_f.expect("resolved"),
            self.floor.expect("resolved"),
        )?)
    }
}

fn run_evaluate(flags: &EvaluateArgs, config: Option<&Path>) -> CliResult<()> {
    let a = merge("reset evaluate", flags, config)?.resolve()?;
    let out = a.out.clone().expect("resolved");
    write_resolved("reset evaluate", &a, &out)?;

    let p = a.params()?;
    let (t_max, points) = (a.t_max.expect("resolved"), a.points.expect("resolved"));
    if !(t_max > 0.0 && t_max.is_finite()) || points < 2 {
        return Err(CliError::input("need --t-max > 0 and --points >= 2"));
    }
    let times: Vec<f64> = (0..points).map(|k| t_max * k as f64 / (points - 1) as f64).collect();
    let curve = residual_curve(&p, &times);
    let text = match a.format.expect("resolved") {
        Format::Csv => curve_to_csv(&times, &curve),
        Format::Svg => line_plot(
            "Residual excitation",
            "time (ns)",
            "p_e",
            &[Series {
                name: "p_e",
                points: times.iter().map(|t| t * 1e9).zip(curve.iter().copied()).collect(),
            }],
        ),
        other => {
            return Err(CliError::input(format!(
                "`reset evaluate` cannot write --format {}",
                other.name()
            )))
        }
    };
    write_output(&out, &text)?;
    if let Some(threshold) = a.threshold {
        let t = time_to_threshold(&p, threshold)?;
        println!("t_threshold_s = {t:e} (threshold {threshold})");
    }
    Ok(())
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurveFitArgs {
    /// Curve as `t_seconds,p_e` CSV
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn run_curve_fit(flags: &CurveFitArgs, config: Option<&Path>) -> CliResult<()> {
    let mut a = merge("reset fit", flags, config)?;
    let out = a.out.get_or_insert_with(|| PathBuf::from("reset-fit.json")).clone();
    write_resolved("reset fit", &a, &out)?;

    let path = required(a.data.clone(), "data")?;
    let (t, p) = curve_from_csv(&read_input(&path)?)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let fit = fit_reset_curve(&t, &p)?;
    let mut text = serde_json::to_string_pretty(&fit)?;
    text.push('\n');
    write_output(&out, &text)?;
    println!(
        "g_qf = {:.6e} Hz, kappa_f = {:.6e} Hz, floor = {:.5}, regime = {:?}, converged = {}",
        fit.params.g_qf, fit.params.kappa_f, fit.params.p_exc_ss, fit.regime, fit.converged
    );
    if !fit.converged {
        return Err(CliError::Numerical(format!(
            "fit did not converge after {} iterations; result written to {}",
            fit.iterations,
            out.display()
        )));
    }
    Ok(())
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CascadeArgs {
    /// f–e stage coupling in Hz
    #[arg(long)]
    pub g_fe: Option<f64>,
    /// f–e stage mode linewidth in Hz
    #[arg(long)]
    pub kappa_fe: Option<f64>,
    /// f–e stage steady-state floor
    #[arg(long)]
    pub floor_fe: Option<f64>,
    /// e–g stage coupling in Hz
    #[arg(long)]
    pub g_eg: Option<f64>,
    /// e–g stage mode linewidth in Hz
    #[arg(long)]
    pub kappa_eg: Option<f64>,
    /// e–g stage steady-state floor
    #[arg(long)]
    pub floor_eg: Option<f64>,
    /// f–e stage duration in seconds
    #[arg(long)]
    pub t_rst_f: Option<f64>,
    /// e–g stage duration in seconds (always 0 for `lru`)
    #[arg(long)]
    pub t_rst_e: Option<f64>,
    /// Reset-mode frequency in Hz
    #[arg(long)]
    pub mode_frequency: Option<f64>,
    /// Initial level: g | e | f
    #[arg(long)]
    pub initial: Option<Level>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

const RESET_MODE_FREQUENCY: f64 = 3.567e9;

impl CascadeArgs {
    fn resolve(mut self, lru: bool) -> Self {
        let (fe, eg) = (ResetParams::reference_fe(), ResetParams::reference_eg());
        self.g_fe.get_or_insert(fe.g_qf);
        self.kappa_fe.get_or_insert(fe.kappa_f);
        self.floor_fe.get_or_insert(fe.p_exc_ss);
        self.g_eg.get_or_insert(eg.g_qf);
        self.kappa_eg.get_or_insert(eg.kappa_f);
        self.floor_eg.get_or_insert(eg.p_exc_ss);
        let reference = CascadeSchedule::reference(RESET_MODE_FREQUENCY);
        if lru {
            self.t_rst_f.get_or_insert(62e-9);
            self.t_rst_e = Some(0.0);
        } else {
            self.t_rst_f.get_or_insert(reference.t_rst_f);
            self.t_rst_e.get_or_insert(reference.t_rst_e);
        }
        self.mode_frequency.get_or_insert(RESET_MODE_FREQUENCY);
        self.initial.get_or_insert(Level::F);
        let name = if lru { "lru.json" } else { "cascade.json" };
        self.out.get_or_insert_with(|| PathBuf::from(name));
        self
    }
}

#[derive(Debug, Serialize)]
struct CascadeReport {
    schedule: CascadeSchedule,
    initial: Level,
    #[serde(flatten)]
    outcome: CascadeOutcome,
}

fn run_cascade(flags: &CascadeArgs, config: Option<&Path>, lru: bool) -> CliResult<()> {
    let command = if lru { "reset lru" } else { "reset cascade" };
    let a = merge(command, flags, config)?.resolve(lru);
    let out = a.out.clone().expect("resolved");
    write_resolved(command, &a, &out)?;

    let fe = ResetParams::new(a.g_fe.unwrap(), a.kappa_fe.unwrap(), a.floor_fe.unwrap())?;
    let eg = ResetParams::new(a.g_eg.unwrap(), a.kappa_eg.unwrap(), a.floor_eg.unwrap())?;
    let mode = a.mode_frequency.unwrap();
    let qubit = QubitParams::reference();
    let schedule = CascadeSchedule {
        t_rst_f: a.t_rst_f.unwrap(),
        t_rst_e: a.t_rst_e.unwrap(),
        omega_rst_f: qubit.fe_reset_frequency(mode),
        omega_rst_e: mode,
        qubit,
    };
    let initial = a.initial.unwrap();
    let outcome = cascade_evaluate(&schedule, &fe, &eg, Populations::pure(initial))?;
    let mut text = serde_json::to_string_pretty(&CascadeReport { schedule, initial, outcome })?;
    text.push('\n');
    write_output(&out, &text)?;
    let p = outcome.populations;
    println!(
        "p_g = {:.5}, p_e = {:.5}, p_f = {:.5}, total_duration = {:e} s",
        p.p_g, p.p_e, p.p_f, outcome.total_duration
    );
    Ok(())
}

pub fn run_reset(cmd: &ResetCommand, config: Option<&Path>) -> CliResult<()> {
    match cmd {
        ResetCommand::Evaluate(a) => run_evaluate(a, config),
        ResetCommand::Fit(a) => run_curve_fit(a, config),
        ResetCommand::Cascade(a) => run_cascade(a, config, false),
        ResetCommand::Lru(a) => run_cascade(a, config, true),
    }
}
