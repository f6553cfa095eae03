//! The multi-mode Purcell filter: an open-ended λ/2 line whose output tap
//! sits a quarter wavelength (at the protected qubit frequency) from one
//! open end, so the dangling stub shorts the output at that frequency.
//!
//! ```text
//!   in ─┤C_in├─ o━━━ l_p1 ━━━A━━━━━━ l_p2 ━━━━━━B━━━ l_p3 ━━━ o
//!                            │                   │
//!                  C_qf ┌────┤                  C_out
//!                       │    └ C_fr ─ r          │
//!                       q ─── C_qr ──┘ (λ/4)    out
//!                       │
//!                      C_q
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::network::{sweep, Compiled, FrequencySweep, Netlist, RE_Y_FLOOR};
use crate::tline::{propagation_constant, LineSpec, Response, ZERO_TOL};

pub const PORT_IN: &str = "1";
pub const PORT_OUT: &str = "2";
pub const PORT_QUBIT: &str = "3";

const NODE_IN: &str = "in";
const NODE_END_IN: &str = "f_open_in";
const NODE_TAP_Q: &str = "f_tap_q";
const NODE_TAP_OUT: &str = "f_tap_out";
const NODE_END_OUT: &str = "f_open_out";
const NODE_OUT: &str = "out";
const NODE_QUBIT: &str = "q";
const NODE_RES: &str = "r";

const PRESETS: &[(&str, &str)] = &[
    ("default", include_str!("../presets/default.json")),
    ("wide", include_str!("../presets/wide.json")),
];

/// Characteristic impedance and phase velocity shared by the filter segments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Medium {
    pub z0: f64,
    pub v_phase: f64,
}

impl Medium {
    pub fn line(&self, length: f64) -> LineSpec {
        LineSpec { z0: self.z0, v_phase: self.v_phase, length }
    }
}

/// Physical description of the filter and its couplings.
///
/// `resonator` is a λ/4 line shorted at its far end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterGeometry {
    pub l_p1: f64,
    pub l_p2: f64,
    pub l_p3: f64,
    pub line: Medium,
    pub c_in: f64,
    pub c_out: f64,
    pub c_qf: f64,
    pub c_qr: f64,
    pub c_fr: f64,
    pub c_q: f64,
    pub resonator: LineSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[default]
    WithStub,
    WithoutStub,
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "with_stub" | "stub" => Ok(Variant::WithStub),
            "without_stub" | "no_stub" => Ok(Variant::WithoutStub),
            other => Err(Error::Domain(format!("unknown variant `{other}`"))),
        }
    }
}

impl FilterGeometry {
    pub fn preset_names() -> Vec<&'static str> {
        PRESETS.iter().map(|p| p.0).collect()
    }

    /// `default` has `l_p1/l_p = 0.01` and the stub tuned to 5 GHz; `wide`
    /// moves the qubit tap to `l_p1/l_p = 0.39`, adding a second notch.
    pub fn preset(name: &str) -> Result<Self> {
        let text = PRESETS.iter().find(|p| p.0 == name).map(|p| p.1).ok_or_else(|| {
            Error::Domain(format!(
                "unknown preset `{name}` (available: {})",
                Self::preset_names().join(", ")
            ))
        })?;
        Self::from_json(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let g: FilterGeometry = serde_json::from_str(text)?;
        g.validate()?;
        Ok(g)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn total_length(&self) -> f64 {
        self.l_p1 + self.l_p2 + self.l_p3
    }

    pub fn validate(&self) -> Result<()> {
        for (name, l) in [("l_p1", self.l_p1), ("l_p2", self.l_p2), ("l_p3", self.l_p3)] {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(Error::Domain(format!("{name} must be >= 0, got {l}")));
            }
        }
        if !(self.total_length() > 0.0) {
            return Err(Error::Domain("total filter length must be > 0".into()));
        }
        self.line.line(self.total_length()).validate()?;
        for (name, c) in [
            ("c_in", self.c_in),
            ("c_out", self.c_out),
            ("c_qf", self.c_qf),
            ("c_qr", self.c_qr),
            ("c_fr", self.c_fr),
            ("c_q", self.c_q),
        ] {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::Domain(format!("{name} must be > 0, got {c}")));
            }
        }
        self.resonator.validate()?;
        if self.resonator.length == 0.0 {
            return Err(Error::Domain("resonator length must be > 0".into()));
        }
        Ok(())
    }

    /// Segment lengths actually used by `variant`: without the stub the
    /// output tap moves to the open end and the total length is kept.
    pub fn segments(&self, variant: Variant) -> (f64, f64, f64) {
        match variant {
            Variant::WithStub => (self.l_p1, self.l_p2, self.l_p3),
            Variant::WithoutStub => (self.l_p1, self.l_p2 + self.l_p3, 0.0),
        }
    }

    /// Same device at `s` times the frequency: lengths and capacitances divided by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            l_p1: self.l_p1 / s,
            l_p2: self.l_p2 / s,
            l_p3: self.l_p3 / s,
            c_in: self.c_in / s,
            c_out: self.c_out / s,
            c_qf: self.c_qf / s,
            c_qr: self.c_qr / s,
            c_fr: self.c_fr / s,
            c_q: self.c_q / s,
            resonator: self.resonator.with_length(self.resonator.length / s),
            ..*self
        }
    }

    /// Places the stub notch at `f` by resizing `l_p3` at fixed total length.
    pub fn with_stub_notch_at(&self, f: f64) -> Result<Self> {
        let l3 = self.line.v_phase / (4.0 * f);
        let l2 = self.total_length() - self.l_p1 - l3;
        if l2 < 0.0 {
            return Err(Error::Domain(format!("a stub for {f:.4e} Hz does not fit in the filter")));
        }
        Ok(Self { l_p2: l2, l_p3: l3, ..*self })
    }
}

/// Three-port circuit of the filter with ports `1` (feedline input),
/// `2` (feedline output) and `3` (qubit), all referenced to `z0`.
pub fn build_netlist(geom: &FilterGeometry, variant: Variant) -> Result<Netlist> {
    geom.validate()?;
    let (l1, l2, l3) = geom.segments(variant);
    let end_in = if l1 > 0.0 { NODE_END_IN } else { NODE_TAP_Q };
    let tap_out = if l2 > 0.0 { NODE_TAP_OUT } else { NODE_TAP_Q };
    let mut n = Netlist::new();
    let gnd = n.ground.clone();
    n.capacitor("C_in", NODE_IN, end_in, geom.c_in);
    if l1 > 0.0 {
        n.tline("l_p1", end_in, NODE_TAP_Q, geom.line.line(l1));
    }
    if l2 > 0.0 {
        n.tline("l_p2", NODE_TAP_Q, tap_out, geom.line.line(l2));
    }
    if l3 > 0.0 {
        n.tline("l_p3", tap_out, NODE_END_OUT, geom.line.line(l3));
    }
    n.capacitor("C_out", tap_out, NODE_OUT, geom.c_out)
        .capacitor("C_q", NODE_QUBIT, &gnd, geom.c_q)
        .capacitor("C_qf", NODE_QUBIT, NODE_TAP_Q, geom.c_qf)
        .capacitor("C_qr", NODE_QUBIT, NODE_RES, geom.c_qr)
        .capacitor("C_fr", NODE_RES, NODE_TAP_Q, geom.c_fr)
        .tline("resonator", NODE_RES, &gnd, geom.resonator)
        .port(PORT_IN, NODE_IN, geom.line.z0)
        .port(PORT_OUT, NODE_OUT, geom.line.z0)
        .port(PORT_QUBIT, NODE_QUBIT, geom.line.z0);
    Ok(n)
}

/// The filter seen as a feedline two-port: [`build_netlist`] without the
/// qubit port, so the qubit node stays unloaded in S-parameter sweeps.
pub fn spectrum_netlist(geom: &FilterGeometry, variant: Variant) -> Result<Netlist> {
    let mut n = build_netlist(geom, variant)?;
    n.ports.retain(|p| p.name != PORT_QUBIT);
    Ok(n)
}

/// The bare line segments with no couplings: ports `3` at the qubit tap
/// and `2` at the output tap.
pub fn transfer_model_netlist(geom: &FilterGeometry) -> Result<Netlist> {
    geom.validate()?;
    let tap_q = if geom.l_p1 > 0.0 { NODE_TAP_Q } else { NODE_END_IN };
    let tap_out = if geom.l_p2 > 0.0 { NODE_TAP_OUT } else { tap_q };
    let mut n = Netlist::new();
    if geom.l_p1 > 0.0 {
        n.tline("l_p1", NODE_END_IN, tap_q, geom.line.line(geom.l_p1));
    }
    if geom.l_p2 > 0.0 {
        n.tline("l_p2", tap_q, tap_out, geom.line.line(geom.l_p2));
    }
    if geom.l_p3 > 0.0 {
        n.tline("l_p3", tap_out, NODE_END_OUT, geom.line.line(geom.l_p3));
    }
    n.port(PORT_QUBIT, tap_q, geom.line.z0).port(PORT_OUT, tap_out, geom.line.z0);
    Ok(n)
}

/// Transfer impedance from the qubit tap to the output tap of the bare
/// open-ended line,
///
/// `Z23 = −j Z0 cos βl_p1 cos βl_p3 / sin βl_p`.
///
/// Exactly zero whenever `cos βl_p1 = 0` or `cos βl_p3 = 0`; a pole at the
/// open-line resonances `sin βl_p = 0`.
pub fn z23_closed_form(geom: &FilterGeometry, f: f64) -> Result<Response> {
    if !(f > 0.0) {
        return Err(Error::Domain(format!("frequency must be > 0, got {f}")));
    }
    let beta = propagation_constant(f, geom.line.v_phase)?;
    let c1 = (beta * geom.l_p1).cos();
    let c3 = (beta * geom.l_p3).cos();
    if c1.abs() < ZERO_TOL || c3.abs() < ZERO_TOL {
        return Ok(Response::Finite(Complex64::new(0.0, 0.0)));
    }
    let den = (beta * geom.total_length()).sin();
    if den.abs() < ZERO_TOL {
        return Ok(Response::Pole);
    }
    Ok(Response::Finite(Complex64::new(0.0, -geom.line.z0 * c1 * c3 / den)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NotchFamily {
    /// `l_p3` is an odd number of quarter wavelengths.
    Stub,
    /// `l_p1` is an odd number of quarter wavelengths.
    InputSegment,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Notch {
    pub frequency: f64,
    pub family: NotchFamily,
}

/// All frequencies in `[lo, hi]` where the qubit tap decouples from the output.
pub fn notch_frequencies(geom: &FilterGeometry, lo: f64, hi: f64) -> Result<Vec<Notch>> {
    if !(lo > 0.0 && hi >= lo) {
        return Err(Error::Domain(format!("invalid band {lo}..{hi}")));
    }
    let mut out = Vec::new();
    for (len, family) in [(geom.l_p3, NotchFamily::Stub), (geom.l_p1, NotchFamily::InputSegment)] {
        if len <= 0.0 {
            continue;
        }
        let f_quarter = geom.line.v_phase / (4.0 * len);
        let k_min = ((lo / f_quarter - 1.0) / 2.0).ceil().max(0.0) as u64;
        let mut k = k_min;
        loop {
            let f = (2 * k + 1) as f64 * f_quarter;
            if f > hi {
                break;
            }
            if f >= lo {
                out.push(Notch { frequency: f, family });
            }
            k += 1;
        }
    }
    out.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReYMethod {
    /// Real part of the admittance the qubit port drives.
    FullAdmittance,
    /// Power reaching the matched output port only.
    #[default]
    OutputPower,
}

impl std::str::FromStr for ReYMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full_admittance" | "full" => Ok(ReYMethod::FullAdmittance),
            "output_power" | "output" => Ok(ReYMethod::OutputPower),
            other => Err(Error::Domain(format!("unknown Re Y method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "seconds")]
pub enum TpValue {
    Seconds(f64),
    /// `Re Y` below [`RE_Y_FLOOR`]: no measurable Purcell decay.
    AboveCeiling,
    /// The network was singular at this frequency.
    Gap,
}

impl TpValue {
    /// Seconds, with the ceiling as `+inf` and gaps as `None`.
    pub fn as_seconds(&self) -> Option<f64> {
        match *self {
            TpValue::Seconds(t) => Some(t),
            TpValue::AboveCeiling => Some(f64::INFINITY),
            TpValue::Gap => None,
        }
    }
}

/// Purcell-limited lifetime `T_p = C_q / Re Y(ω)` over a frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TpCurve {
    pub variant: Variant,
    pub method: ReYMethod,
    pub frequencies: Vec<f64>,
    pub tp: Vec<TpValue>,
}

impl TpCurve {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// `(f, T_p)` pairs, gaps dropped, ceiling as `+inf`.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.frequencies.iter().zip(&self.tp).filter_map(|(&f, t)| t.as_seconds().map(|t| (f, t)))
    }

    pub fn max_in(&self, lo: f64, hi: f64) -> Option<f64> {
        self.points().filter(|&(f, _)| f >= lo && f <= hi).map(|p| p.1).reduce(f64::max)
    }

    pub fn value_near(&self, f: f64) -> Option<TpValue> {
        let i = self
            .frequencies
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - f).abs().total_cmp(&(b.1 - f).abs()))?
            .0;
        Some(self.tp[i])
    }

    /// Largest run of consecutive samples with `T_p ≥ threshold` that
    /// contains the sample nearest `f`, as `(first, last)` frequencies.
    pub fn band_above(&self, threshold: f64, f: f64) -> Option<(f64, f64)> {
        let ok: Vec<bool> =
            self.tp.iter().map(|t| t.as_seconds().is_some_and(|s| s >= threshold)).collect();
        let i = self
            .frequencies
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - f).abs().total_cmp(&(b.1 - f).abs()))?
            .0;
        if !ok[i] {
            return None;
        }
        let (mut lo, mut hi) = (i, i);
        while lo > 0 && ok[lo - 1] {
            lo -= 1;
        }
        while hi + 1 < ok.len() && ok[hi + 1] {
            hi += 1;
        }
        Some((self.frequencies[lo], self.frequencies[hi]))
    }

    /// Total width of all samples with `T_p ≥ threshold`, each sample
    /// weighted by the grid step.
    pub fn width_above(&self, threshold: f64) -> f64 {
        if self.len() < 2 {
            return 0.0;
        }
        let step =
            (self.frequencies[self.len() - 1] - self.frequencies[0]) / (self.len() - 1) as f64;
        self.tp.iter().filter(|t| t.as_seconds().is_some_and(|s| s >= threshold)).count() as f64
            * step
    }

    /// Frequencies of local maxima of `T_p`. Samples above the ceiling
    /// count as infinite, so a run of them is one maximum reported at its
    /// centre; gaps break runs.
    pub fn local_maxima(&self) -> Vec<f64> {
        let v: Vec<Option<f64>> = self.tp.iter().map(|t| t.as_seconds()).collect();
        let mut out = Vec::new();
        let mut i = 1;
        while i + 1 < v.len() {
            let (Some(left), Some(here)) = (v[i - 1], v[i]) else {
                i += 1;
                continue;
            };
            let mut end = i;
            while end + 1 < v.len() && v[end + 1] == Some(here) {
                end += 1;
            }
            if here > left && end + 1 < v.len() && v[end + 1].is_some_and(|right| here > right) {
                out.push(0.5 * (self.frequencies[i] + self.frequencies[end]));
            }
            i = end + 1;
        }
        out
    }

    /// CSV with columns `f_hz,tp_seconds,ceiling_flag`; gaps are `nan`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("f_hz,tp_seconds,ceiling_flag\n");
        for (f, t) in self.frequencies.iter().zip(&self.tp) {
            let _ = match t {
                TpValue::Seconds(s) => writeln!(out, "{f:e},{s:e},0"),
                TpValue::AboveCeiling => writeln!(out, "{f:e},inf,1"),
                TpValue::Gap => writeln!(out, "{f:e},nan,0"),
            };
        }
        out
    }
}

/// Netlist used for lifetime sweeps: both feedline ports terminated in `z0`.
pub fn tp_netlist(geom: &FilterGeometry, variant: Variant) -> Result<Netlist> {
    build_netlist(geom, variant)?.with_port_terminations(&[PORT_IN, PORT_OUT])
}

/// `Re Y` seen by the qubit at `f`.
pub fn qubit_re_y(compiled: &Compiled, method: ReYMethod, f: f64) -> Result<f64> {
    match method {
        ReYMethod::FullAdmittance => Ok(compiled.driving_point_admittance(PORT_QUBIT, f)?.re),
        ReYMethod::OutputPower => compiled.re_y_via_output_power(PORT_QUBIT, PORT_OUT, f),
    }
}

pub fn tp_at(c_q: f64, re_y: f64) -> TpValue {
    if re_y < RE_Y_FLOOR {
        TpValue::AboveCeiling
    } else {
        TpValue::Seconds(c_q / re_y)
    }
}

pub fn tp_curve(
    geom: &FilterGeometry,
    variant: Variant,
    grid: &FrequencySweep,
    method: ReYMethod,
) -> Result<TpCurve> {
    grid.validate()?;
    let netlist = tp_netlist(geom, variant)?;
    let compiled = Compiled::new(&netlist)?;
    let frequencies = grid.frequencies();
    let tp = sweep(&frequencies, |f| match qubit_re_y(&compiled, method, f) {
        Ok(re) => Ok(tp_at(geom.c_q, re)),
        Err(Error::Singular { .. }) => Ok(TpValue::Gap),
        Err(e) => Err(e),
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(TpCurve { variant, method, frequencies, tp })
}

/// Dispersive Purcell rate `Γ = κ (g/Δ)²` of a qubit detuned by `delta`
/// from a single lossy mode; all arguments and the result in the same
/// frequency unit.
pub fn single_mode_purcell_rate(g: f64, kappa: f64, delta: f64) -> Result<f64> {
    if delta == 0.0 || !delta.is_finite() {
        return Err(Error::Domain(
            "resonant qubit: the dispersive Purcell formula needs delta != 0".into(),
        ));
    }
    Ok(kappa * (g / delta).powi(2))
}

/// Lifetime `1/(2π Γ)` for a rate quoted as an ordinary frequency.
pub fn lifetime_from_rate(rate_hz: f64) -> f64 {
    1.0 / (2.0 * std::f64::consts::PI * rate_hz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::transfer_impedance;

    fn geom() -> FilterGeometry {
        FilterGeometry::preset("default").unwrap()
    }

    #[test]
    fn presets_load_and_validate() {
        for name in FilterGeometry::preset_names() {
            let g = FilterGeometry::preset(name).unwrap();
            assert!((g.total_length() - 16.5e-3).abs() < 1e-12);
        }
        assert!(FilterGeometry::preset("nope").is_err());
        let g = geom();
        assert!((g.l_p1 / g.total_length() - 0.01).abs() < 1e-12);
        let w = FilterGeometry::preset("wide").unwrap();
        assert!((w.l_p1 / w.total_length() - 0.39).abs() < 1e-12);
    }

    #[test]
    fn invalid_geometry_rejected() {
        let mut g = geom();
        g.c_qf = 0.0;
        assert!(g.validate().is_err());
        let mut g = geom();
        g.l_p2 = -1e-3;
        assert!(g.validate().is_err());
    }

    #[test]
    fn netlist_has_three_ports() {
        for v in [Variant::WithStub, Variant::WithoutStub] {
            let n = build_netlist(&geom(), v).unwrap();
            assert_eq!(n.ports.len(), 3);
            n.validate().unwrap();
        }
        assert_eq!(spectrum_netlist(&geom(), Variant::WithStub).unwrap().ports.len(), 2);
    }

    #[test]
    fn zero_stub_degenerates_to_stubless() {
        let g = geom();
        let folded = FilterGeometry { l_p2: g.l_p2 + g.l_p3, l_p3: 0.0, ..g };
        assert_eq!(
            build_netlist(&folded, Variant::WithStub).unwrap(),
            build_netlist(&g, Variant::WithoutStub).unwrap()
        );
    }

    #[test]
    fn closed_form_notches() {
        let g = geom();
        let f_stub = g.line.v_phase / (4.0 * g.l_p3);
        assert!((f_stub - 5e9).abs() < 1e-3);
        assert_eq!(z23_closed_form(&g, f_stub).unwrap().norm(), 0.0);
        let f_in = g.line.v_phase / (4.0 * g.l_p1);
        assert_eq!(z23_closed_form(&g, f_in).unwrap().norm(), 0.0);
        let f_pole = g.line.v_phase / (2.0 * g.total_length());
        assert!(z23_closed_form(&g, f_pole).unwrap().is_pole());
    }

    #[test]
    fn closed_form_matches_solver_spot_check() {
        // an arbitrary asymmetric geometry, away from notches and poles
        let g = FilterGeometry { l_p1: 1e-3, l_p2: 6e-3, l_p3: 5e-3, ..geom() };
        let n = transfer_model_netlist(&g).unwrap();
        for f in [1.3e9, 2.7e9, 4.1e9, 6.6e9] {
            let want = z23_closed_form(&g, f).unwrap().finite().unwrap();
            let got = transfer_impedance(&n, PORT_OUT, PORT_QUBIT, f).unwrap().finite().unwrap();
            assert!((got - want).norm() < 1e-9 * want.norm(), "{f}: {got} vs {want}");
        }
    }

    #[test]
    fn transfer_model_with_missing_segments() {
        let g = FilterGeometry { l_p1: 0.0, ..geom() };
        let n = transfer_model_netlist(&g).unwrap();
        n.validate().unwrap();
        assert_eq!(n.elements.len(), 2);
        let f = 2.2e9;
        let want = z23_closed_form(&g, f).unwrap().finite().unwrap();
        let got = transfer_impedance(&n, PORT_OUT, PORT_QUBIT, f).unwrap().finite().unwrap();
        assert!((got - want).norm() < 1e-9 * want.norm());
    }

    #[test]
    fn notch_listing() {
        let g = geom();
        let n = notch_frequencies(&g, 1e9, 8e9).unwrap();
        assert_eq!(n.len(), 1);
        assert_eq!(n[0].family, NotchFamily::Stub);
        assert!((n[0].frequency - 5e9).abs() < 1e-3);
        for notch in notch_frequencies(&g, 1e9, 40e9).unwrap() {
            let z = z23_closed_form(&g, notch.frequency).unwrap().norm();
            assert!(z < 1e-9 * g.line.z0);
        }
        let w = FilterGeometry::preset("wide").unwrap();
        let n = notch_frequencies(&w, 3e9, 6e9).unwrap();
        assert_eq!(n.len(), 2);
        assert_eq!(n[0].family, NotchFamily::InputSegment);
        assert!(notch_frequencies(&g, 5e9, 4e9).is_err());
        assert!(notch_frequencies(&g, 5.1e9, 5.2e9).unwrap().is_empty());
    }

    #[test]
    fn purcell_rate_examples() {
        assert_eq!(single_mode_purcell_rate(0.0, 20.2e6, 2e9).unwrap(), 0.0);
        let a = single_mode_purcell_rate(50e6, 20.2e6, 2e9).unwrap();
        let b = single_mode_purcell_rate(50e6, 20.2e6, 4e9).unwrap();
        assert!((a / b - 4.0).abs() < 1e-12);
        assert!((a - 12.625e3).abs() < 1e-9);
        assert!((lifetime_from_rate(a) - 12.606e-6).abs() < 1e-9);
        assert!(single_mode_purcell_rate(50e6, 20.2e6, 0.0).is_err());
    }

    #[test]
    fn lossless_environment_is_above_ceiling() {
        let n = {
            let mut n = build_netlist(&geom(), Variant::WithStub).unwrap();
            n.resistor("Z0", "out", "gnd", 1e30);
            n
        };
        let c = Compiled::new(&n).unwrap();
        let re = qubit_re_y(&c, ReYMethod::FullAdmittance, 4.8e9).unwrap();
        assert!(re.abs() < RE_Y_FLOOR);
        assert_eq!(tp_at(geom().c_q, re.max(0.0)), TpValue::AboveCeiling);
    }

    #[test]
    fn tp_csv_layout() {
        let curve = TpCurve {
            variant: Variant::WithStub,
            method: ReYMethod::OutputPower,
            frequencies: vec![1e9, 2e9, 3e9],
            tp: vec![TpValue::Seconds(1e-5), TpValue::AboveCeiling, TpValue::Gap],
        };
        let csv = curve.to_csv();
        assert_eq!(csv, "f_hz,tp_seconds,ceiling_flag\n1e9,1e-5,0\n2e9,inf,1\n3e9,nan,0\n");
    }

    #[test]
    fn ceiling_plateau_is_one_maximum() {
        let curve = TpCurve {
            variant: Variant::WithStub,
            method: ReYMethod::OutputPower,
            frequencies: (0..7).map(|k| k as f64).collect(),
            tp: vec![
                TpValue::Seconds(1.0),
                TpValue::Seconds(2.0),
                TpValue::AboveCeiling,
                TpValue::AboveCeiling,
                TpValue::Seconds(2.0),
                TpValue::Gap,
                TpValue::Seconds(1.0),
            ],
        };
        assert_eq!(curve.local_maxima(), vec![2.5]);
    }
}
