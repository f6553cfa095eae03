//! `spectrum` and `tp`: frequency sweeps of a netlist or filter geometry.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use purcell_core::filter::{
    spectrum_netlist, tp_curve, FilterGeometry, ReYMethod, TpValue, Variant,
};
use purcell_core::network::{
    sweep, write_touchstone, Compiled, FrequencySweep, Netlist, SPoint, Spacing,
};
use purcell_core::Error;

use crate::config::{merge, write_output, write_resolved, Band, Format};
use crate::error::{CliError, CliResult};
use crate::svg::{line_plot, Series};

const LONG_LIFETIME: f64 = 1e-3;

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumArgs {
    /// Netlist JSON file (takes precedence over --geometry and --preset)
    #[arg(long)]
    pub netlist: Option<PathBuf>,
    /// Filter geometry JSON file (takes precedence over --preset)
    #[arg(long)]
    pub geometry: Option<PathBuf>,
    /// Built-in filter geometry: default | wide
    #[arg(long)]
    pub preset: Option<String>,
    /// with_stub | without_stub
    #[arg(long)]
    pub variant: Option<Variant>,
    /// Frequency band in GHz, e.g. 3:7
    #[arg(long)]
    pub band: Option<Band>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Use logarithmic frequency spacing
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub log_spacing: Option<bool>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv | touchstone | svg
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl SpectrumArgs {
    fn resolve(mut self) -> Self {
        if self.netlist.is_some() {
            self.geometry = None;
            self.preset = None;
        } else if self.geometry.is_some() {
            self.preset = None;
        } else {
            self.preset.get_or_insert_with(|| "default".into());
        }
        self.variant.get_or_insert(Variant::WithStub);
        self.band.get_or_insert(Band::new(3.0, 7.0));
        self.points.get_or_insert(4001);
        self.log_spacing.get_or_insert(false);
        self.format.get_or_insert(Format::Csv);
        let ext = match self.format {
            Some(Format::Touchstone) => "s2p",
            Some(Format::Svg) => "svg",
            _ => "csv",
        };
        self.out.get_or_insert_with(|| PathBuf::from(format!("spectrum.{ext}")));
        self
    }
}

fn geometry(path: &Option<PathBuf>, preset: &Option<String>) -> CliResult<FilterGeometry> {
    match (path, preset) {
        (Some(p), _) => Ok(FilterGeometry::load(p).map_err(|e| with_path(p, e))?),
        (None, Some(name)) => Ok(FilterGeometry::preset(name)?),
        (None, None) => Err(CliError::input("no geometry given")),
    }
}

fn with_path(path: &Path, e: Error) -> CliError {
    match CliError::from(e) {
        CliError::Input(m) => CliError::Input(format!("{}: {m}", path.display())),
        other => other,
    }
}

fn grid(band: Band, points: usize, log: bool) -> CliResult<FrequencySweep> {
    let (lo, hi) = band.hz();
    let spacing = if log { Spacing::Log } else { Spacing::Linear };
    Ok(FrequencySweep::new(lo, hi, points, spacing)?)
}

pub fn run_spectrum(flags: &SpectrumArgs, config: Option<&Path>) -> CliResult<()> {
    let a = merge("spectrum", flags, config)?.resolve();
    let out = a.out.clone().expect("resolved");
    write_resolved("spectrum", &a, &out)?;

    let netlist = match &a.netlist {
        Some(p) => Netlist::load(p).map_err(|e| with_path(p, e))?,
        None => spectrum_netlist(&geometry(&a.geometry, &a.preset)?, a.variant.expect("resolved"))?,
    };
    if netlist.ports.len() < 2 {
        return Err(CliError::input(format!(
            "S21 needs at least two ports, the netlist has {}",
            netlist.ports.len()
        )));
    }
    let compiled = Compiled::new(&netlist)?;
    let freqs =
        grid(a.band.expect("resolved"), a.points.expect("resolved"), a.log_spacing == Some(true))?
            .frequencies();
    let rows = sweep(&freqs, |f| match compiled.s_parameters(f) {
        Ok(s) => Ok(Some(s)),
        Err(Error::Singular { .. }) => Ok(None),
        Err(e) => Err(e),
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let singular = rows.iter().filter(|r| r.is_none()).count();
    if singular > 0 {
        log::warn!("{singular} of {} frequencies were singular and are flagged", rows.len());
    }

    let text = match a.format.expect("resolved") {
        Format::Csv => {
            let mut s = String::from("f_hz,s21_re,s21_im,s21_db,singular\n");
            for (f, r) in freqs.iter().zip(&rows) {
                let _ = match r {
                    Some(m) => {
                        let z = m[(1, 0)];
                        writeln!(s, "{f:e},{:e},{:e},{:e},0", z.re, z.im, db(z.norm()))
                    }
                    None => writeln!(s, "{f:e},nan,nan,nan,1"),
                };
            }
            s
        }
        Format::Touchstone => {
            let points: Vec<SPoint> = freqs
                .iter()
                .zip(&rows)
                .filter_map(|(&frequency, r)| r.clone().map(|s| SPoint { frequency, s }))
                .collect();
            let z_ref = netlist.ports[0].z_ref;
            write_touchstone(&points, z_ref)?
        }
        Format::Svg => {
            let points = freqs
                .iter()
                .zip(&rows)
                .map(|(f, r)| (f / 1e9, r.as_ref().map_or(f64::NAN, |m| db(m[(1, 0)].norm()))))
                .collect();
            line_plot(
                "Transmission",
                "frequency (GHz)",
                "|S21| (dB)",
                &[Series { name: "S21", points }],
            )
        }
        Format::Json => return Err(unsupported("spectrum", Format::Json)),
    };
    write_output(&out, &text)?;
    println!("{} points written to {} ({singular} singular)", rows.len(), out.display());
    Ok(())
}

fn db(m: f64) -> f64 {
    20.0 * m.log10()
}

fn unsupported(command: &str, f: Format) -> CliError {
    CliError::input(format!("`{command}` cannot write --format {}", f.name()))
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TpArgs {
    /// Filter geometry JSON file (takes precedence over --preset)
    #[arg(long)]
    pub geometry: Option<PathBuf>,
    /// Built-in filter geometry: default | wide
    #[arg(long)]
    pub preset: Option<String>,
    /// with_stub | without_stub
    #[arg(long)]
    pub variant: Option<Variant>,
    /// output_power | full_admittance
    #[arg(long)]
    pub method: Option<ReYMethod>,
    /// Frequency band in GHz, e.g. 3:7
    #[arg(long)]
    pub band: Option<Band>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv | svg
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl TpArgs {
    fn resolve(mut self) -> Self {
        if self.geometry.is_some() {
            self.preset = None;
        } else {
            self.preset.get_or_insert_with(|| "default".into());
        }
        self.variant.get_or_insert(Variant::WithStub);
        self.method.get_or_insert(ReYMethod::OutputPower);
        self.band.get_or_insert(Band::new(3.0, 7.0));
        self.points.get_or_insert(2001);
        self.format.get_or_insert(Format::Csv);
        let ext = if self.format == Some(Format::Svg) { "svg" } else { "csv" };
        self.out.get_or_insert_with(|| PathBuf::from(format!("tp.{ext}")));
        self
    }
}

pub fn run_tp(flags: &TpArgs, config: Option<&Path>) -> CliResult<()> {
    let a = merge("tp", flags, config)?.resolve();
    let out = a.out.clone().expect("resolved");
    write_resolved("tp", &a, &out)?;

    let geom = geometry(&a.geometry, &a.preset)?;
    let grid = grid(a.band.expect("resolved"), a.points.expect("resolved"), false)?;
    let curve = tp_curve(&geom, a.variant.expect("resolved"), &grid, a.method.expect("resolved"))?;
    let gaps = curve.tp.iter().filter(|t| matches!(t, TpValue::Gap)).count();
    if gaps > 0 {
        log::warn!("{gaps} of {} frequencies were singular and are reported as nan", curve.len());
    }
    let text = match a.format.expect("resolved") {
        Format::Csv => curve.to_csv(),
        Format::Svg => {
            let points = curve
                .frequencies
                .iter()
                .zip(&curve.tp)
                .map(|(f, t)| (f / 1e9, t.as_seconds().map_or(f64::NAN, f64::log10)))
                .collect();
            line_plot(
                "Purcell-limited lifetime",
                "frequency (GHz)",
                "log10 T_p (s)",
                &[Series { name: "T_p", points }],
            )
        }
        other => return Err(unsupported("tp", other)),
    };
    write_output(&out, &text)?;
    let longest = curve.points().map(|p| p.1).fold(0.0, f64::max);
    println!(
        "{} points written to {}; T_p >= 1 ms over {:.1} MHz; max T_p {longest:e} s",
        curve.len(),
        out.display(),
        curve.width_above(LONG_LIFETIME) / 1e6
    );
    Ok(())
}
