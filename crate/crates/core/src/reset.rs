//! Unconditional reset through a lossy filter mode.
//!
//! A qubit brought into resonance with a mode of linewidth κ at coupling
//! `g` exchanges its excitation with the mode, which leaks it to the line:
//!
//! ```text
//! ċ_q = −i g c_f
//! ċ_f = −i g c_q − (κ/2) c_f
//! ```
//!
//! With `M = √|κ² − 16 g²| / 4` the population left behind is
//!
//! ```text
//! p(t) = e^{−κt/2} [cosh Mt + κ/(4M) sinh Mt]²    g < κ/4  (overdamped)
//! p(t) = e^{−κt/2} (κt/4 + 1)²                    g = κ/4  (critically damped)
//! p(t) = e^{−κt/2} [cos Mt + κ/(4M) sin Mt]²      g > κ/4  (underdamped)
//! ```
//!
//! and a fitted steady-state floor enters as `p_ss + (1 − p_ss)·p(t)`.
//! Parameters are ordinary frequencies in Hz; 2π is applied internally.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::lm::{levenberg_marquardt, LmOptions};

/// Relative half-width of the critically damped band around `g = κ/4`.
pub const REGIME_EPS: f64 = 1e-9;

/// Resolution of [`time_to_threshold`].
pub const THRESHOLD_TIME_RESOLUTION: f64 = 0.1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResetParams {
    pub g_qf: f64,
    pub kappa_f: f64,
    #[serde(default)]
    pub p_exc_ss: f64,
}

impl ResetParams {
    pub fn new(g_qf: f64, kappa_f: f64, p_exc_ss: f64) -> Result<Self> {
        let p = Self { g_qf, kappa_f, p_exc_ss };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g_qf >= 0.0 && self.g_qf.is_finite()) {
            return Err(Error::Domain(format!("g_qf must be >= 0, got {}", self.g_qf)));
        }
        if !(self.kappa_f > 0.0 && self.kappa_f.is_finite()) {
            return Err(Error::Domain(format!("kappa_f must be > 0, got {}", self.kappa_f)));
        }
        if !(self.p_exc_ss >= 0.0 && self.p_exc_ss < 1.0) {
            return Err(Error::Domain(format!(
                "p_exc_ss must lie in [0, 1), got {}",
                self.p_exc_ss
            )));
        }
        Ok(())
    }

    /// Reference e–g reset of the device: g = 3.9 MHz, κ = 8.5 MHz, 0.8 % floor.
    pub fn reference_eg() -> Self {
        Self { g_qf: 3.9e6, kappa_f: 8.5e6, p_exc_ss: 0.008 }
    }

    /// Reference f–e reset: g′ = 5.6 MHz, κ′ = 9.1 MHz, 7.1 % floor.
    pub fn reference_fe() -> Self {
        Self { g_qf: 5.6e6, kappa_f: 9.1e6, p_exc_ss: 0.071 }
    }

    pub fn without_floor(&self) -> Self {
        Self { p_exc_ss: 0.0, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Overdamped,
    CriticallyDamped,
    Underdamped,
}

pub fn classify_regime(p: &ResetParams) -> Regime {
    let edge = p.kappa_f / 4.0;
    let g = p.g_qf.abs();
    if g < edge * (1.0 - REGIME_EPS) {
        Regime::Overdamped
    } else if g > edge * (1.0 + REGIME_EPS) {
        Regime::Underdamped
    } else {
        Regime::CriticallyDamped
    }
}

/// `x ↦ sinh(x)/x` and `x ↦ sin(x)/x`, accurate near zero.
fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 + x * x / 6.0
    } else {
        x.sinh() / x
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Floor-free amplitude `|c_q(t)|` per branch.
fn amplitude(p: &ResetParams, t: f64) -> f64 {
    let g = 2.0 * PI * p.g_qf;
    let k = 2.0 * PI * p.kappa_f;
    let quarter = k / 4.0;
    match classify_regime(p) {
        Regime::CriticallyDamped => (-quarter * t).exp() * (quarter * t + 1.0),
        Regime::Underdamped => {
            let m = (16.0 * g * g - k * k).sqrt() / 4.0;
            let x = m * t;
            (-quarter * t).exp() * (x.cos() + quarter * t * sinc(x))
        }
        Regime::Overdamped => {
            let m = (k * k - 16.0 * g * g).sqrt() / 4.0;
            let x = m * t;
            if x < 1.0 {
                (-quarter * t).exp() * (x.cosh() + quarter * t * sinhc(x))
            } else {
                // factor out e^{Mt} so nothing overflows for long times
                let e = (-2.0 * x).exp();
                let a = quarter / m;
                ((m - quarter) * t).exp() * ((1.0 + e) / 2.0 + a * (1.0 - e) / 2.0)
            }
        }
    }
}

/// Residual excitation after resetting for `t` seconds.
pub fn residual_excitation(p: &ResetParams, t: f64) -> f64 {
    let c = amplitude(p, t.max(0.0));
    let bare = (c * c).clamp(0.0, 1.0);
    p.p_exc_ss + (1.0 - p.p_exc_ss) * bare
}

pub fn residual_curve(p: &ResetParams, times: &[f64]) -> Vec<f64> {
    times.iter().map(|&t| residual_excitation(p, t)).collect()
}

/// Fourth-order Runge–Kutta integration of the mode equations, sampled at
/// `times` (any order). Includes the floor exactly like
/// [`residual_excitation`].
pub fn oracle_curve(p: &ResetParams, times: &[f64]) -> Vec<f64> {
    let g = 2.0 * PI * p.g_qf;
    let k = 2.0 * PI * p.kappa_f;
    let h_max = 1.0 / (200.0 * g.max(k));
    let j = Complex64::new(0.0, 1.0);
    let deriv = |y: [Complex64; 2]| [-j * g * y[1], -j * g * y[0] - 0.5 * k * y[1]];
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    let mut out = vec![0.0; times.len()];
    let mut y = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    let mut now = 0.0;
    for idx in order {
        let target = times[idx].max(0.0);
        let span = target - now;
        if span > 0.0 {
            let steps = (span / h_max).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            for _ in 0..steps {
                let k1 = deriv(y);
                let k2 = deriv([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
                let k3 = deriv([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
                let k4 = deriv([y[0] + h * k3[0], y[1] + h * k3[1]]);
                for c in 0..2 {
                    y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
                }
            }
            now = target;
        }
        let bare = y[0].norm_sqr();
        out[idx] = p.p_exc_ss + (1.0 - p.p_exc_ss) * bare;
    }
    out
}

pub fn oracle_residual(p: &ResetParams, t: f64) -> f64 {
    oracle_curve(p, &[t])[0]
}

/// Upper bound `e^{−κt/2}(1 + κ/(4M))²` on the floor-free underdamped curve.
pub fn underdamped_envelope(p: &ResetParams, t: f64) -> f64 {
    let g = 2.0 * PI * p.g_qf;
    let k = 2.0 * PI * p.kappa_f;
    let m = (16.0 * g * g - k * k).max(0.0).sqrt() / 4.0;
    (-k * t / 2.0).exp() * (1.0 + k / (4.0 * m)).powi(2)
}

/// Earliest time after which the residual excitation never again exceeds
/// `threshold` (the last crossing of an oscillating curve).
///
/// Oscillating curves are sampled every `1/(100·max(g, κ))` up to the
/// point where their decay envelope guarantees the threshold, then the
/// last crossing is bisected to 0.1 ns. Overdamped and critically damped
/// curves fall monotonically, so their single crossing is bracketed and
/// bisected directly.
pub fn time_to_threshold(p: &ResetParams, threshold: f64) -> Result<f64> {
    p.validate()?;
    if !(threshold > p.p_exc_ss) {
        return Err(Error::Unreachable { threshold, floor: p.p_exc_ss });
    }
    let above = |t: f64| residual_excitation(p, t) > threshold;
    if !above(0.0) {
        return Ok(0.0);
    }
    let bisect = |mut lo: f64, mut hi: f64| {
        while hi - lo > THRESHOLD_TIME_RESOLUTION {
            let mid = 0.5 * (lo + hi);
            if above(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    };
    let g = 2.0 * PI * p.g_qf;
    let k = 2.0 * PI * p.kappa_f;
    let q = (threshold - p.p_exc_ss) / (1.0 - p.p_exc_ss);
    match classify_regime(p) {
        Regime::Underdamped => {
            let m = (16.0 * g * g - k * k).sqrt() / 4.0;
            let horizon = (2.0 / k) * ((1.0 + k / (4.0 * m)).powi(2) / q).ln().max(0.0);
            let step = 1.0 / (100.0 * g.max(k));
            let n = (horizon / step).ceil() as usize + 1;
            let last_above = (0..=n).rev().find(|&i| above(i as f64 * step)).unwrap_or(0);
            Ok(bisect(last_above as f64 * step, (last_above + 1) as f64 * step))
        }
        Regime::Overdamped | Regime::CriticallyDamped => {
            if g == 0.0 {
                return Err(Error::Unreachable { threshold, floor: 1.0 });
            }
            let mut hi = 1.0 / k;
            while above(hi) {
                hi *= 2.0;
                if !hi.is_finite() || hi > 1e6 {
                    return Err(Error::Unreachable { threshold, floor: p.p_exc_ss });
                }
            }
            Ok(bisect(0.0, hi))
        }
    }
}

/// First zero of the floor-free underdamped curve, where
/// `cos Mt + (κ/4M) sin Mt` first vanishes, if it falls within `horizon`.
pub fn first_minimum(p: &ResetParams, horizon: f64) -> Option<f64> {
    if classify_regime(p) != Regime::Underdamped {
        return None;
    }
    let g = 2.0 * PI * p.g_qf;
    let k = 2.0 * PI * p.kappa_f;
    let m = (16.0 * g * g - k * k).sqrt() / 4.0;
    let t = (PI - (4.0 * m / k).atan()) / m;
    (t <= horizon).then_some(t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResetFit {
    pub params: ResetParams,
    pub regime: Regime,
    /// One-sigma errors on `(g_qf, kappa_f, p_exc_ss)`.
    pub std_errors: ResetParams,
    pub residual_rms: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Least-squares fit of `(g_qf, κ_f, p_exc_ss)` to a measured decay curve.
///
/// A coarse log-spaced grid over `(g, κ)` (with the floor solved linearly
/// at each node) seeds the damped least squares; the regime branch is
/// re-selected on every model evaluation.
pub fn fit_reset_curve(times: &[f64], p_e: &[f64]) -> Result<ResetFit> {
    if times.len() != p_e.len() {
        return Err(Error::Domain("times and p_e differ in length".into()));
    }
    if times.len() < 10 {
        return Err(Error::Domain(format!("need at least 10 points, got {}", times.len())));
    }
    if let Some(bad) = p_e.iter().find(|v| !(**v >= 0.0 && **v <= 1.0)) {
        return Err(Error::Domain(format!("p_e values must lie in [0, 1], got {bad}")));
    }
    if times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(Error::Domain("times must be finite and >= 0".into()));
    }
    let t_max = times.iter().cloned().fold(0.0, f64::max);
    if t_max <= 0.0 {
        return Err(Error::Domain("curve spans no time".into()));
    }
    let scale = 1.0 / t_max;

    let floor_for = |bare: &[f64]| {
        let (mut num, mut den) = (0.0, 0.0);
        for (b, y) in bare.iter().zip(p_e) {
            num += (1.0 - b) * (y - b);
            den += (1.0 - b) * (1.0 - b);
        }
        if den > 0.0 {
            (num / den).clamp(0.0, 0.99)
        } else {
            0.0
        }
    };
    let mut best = (f64::INFINITY, ResetParams::reference_eg());
    let nodes = 40;
    for i in 0..nodes {
        let kappa = scale * 0.5 * 400f64.powf(i as f64 / (nodes - 1) as f64);
        for j in 0..nodes {
            let g = scale * 0.05 * 1000f64.powf(j as f64 / (nodes - 1) as f64);
            let trial = ResetParams { g_qf: g, kappa_f: kappa, p_exc_ss: 0.0 };
            let bare = residual_curve(&trial, times);
            let floor = floor_for(&bare);
            let cost: f64 =
                bare.iter().zip(p_e).map(|(b, y)| (floor + (1.0 - floor) * b - y).powi(2)).sum();
            if cost < best.0 {
                best = (cost, ResetParams { p_exc_ss: floor, ..trial });
            }
        }
    }
    let start = best.1;
    let decode = |v: &[f64]| ResetParams {
        g_qf: (v[0] * scale).abs(),
        kappa_f: (v[1] * scale).abs().max(f64::MIN_POSITIVE),
        p_exc_ss: v[2].clamp(0.0, 1.0 - 1e-12),
    };
    let res = levenberg_marquardt(
        |v| {
            let p = decode(v);
            times.iter().zip(p_e).map(|(&t, &y)| residual_excitation(&p, t) - y).collect()
        },
        &[start.g_qf / scale, start.kappa_f / scale, start.p_exc_ss],
        &LmOptions::default(),
    );
    let params = decode(&res.params);
    Ok(ResetFit {
        params,
        regime: classify_regime(&params),
        std_errors: ResetParams {
            g_qf: res.std_errors[0] * scale,
            kappa_f: res.std_errors[1] * scale,
            p_exc_ss: res.std_errors[2],
        },
        residual_rms: res.residual_rms,
        converged: res.converged,
        iterations: res.iterations,
    })
}

/// Transmon parameters relevant to the reset schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitParams {
    pub omega_eg_max: f64,
    /// `α ≈ E_C/h`, positive.
    pub anharmonicity: f64,
    pub t1: f64,
}

impl QubitParams {
    /// The reference device: 4.621 GHz maximum, 211 MHz anharmonicity, T1 = 58 μs.
    pub fn reference() -> Self {
        Self { omega_eg_max: 4.621e9, anharmonicity: 211e6, t1: 58e-6 }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega_eg_max", self.omega_eg_max),
            ("anharmonicity", self.anharmonicity),
            ("t1", self.t1),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// f–e transition frequency when the e–g transition sits at `omega_eg`.
    pub fn omega_fe(&self, omega_eg: f64) -> f64 {
        omega_eg - self.anharmonicity
    }

    /// e–g frequency that places the f–e transition on a mode at
    /// `mode_frequency`: `ω_rst,f ≈ ω_mode + E_C/h`.
    pub fn fe_reset_frequency(&self, mode_frequency: f64) -> f64 {
        mode_frequency + self.anharmonicity
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeSchedule {
    pub t_rst_f: f64,
    pub t_rst_e: f64,
    pub omega_rst_f: f64,
    pub omega_rst_e: f64,
    pub qubit: QubitParams,
}

impl CascadeSchedule {
    /// `(64 + 242) ns` cascade through a reset mode at `mode_frequency`.
    pub fn reference(mode_frequency: f64) -> Self {
        let qubit = QubitParams::reference();
        Self {
            t_rst_f: 64e-9,
            t_rst_e: 242e-9,
            omega_rst_f: qubit.fe_reset_frequency(mode_frequency),
            omega_rst_e: mode_frequency,
            qubit,
        }
    }

    /// Leakage reduction only: the f–e stage for `t_rst_f`, no e–g stage.
    pub fn lru(t_rst_f: f64, mode_frequency: f64) -> Self {
        Self { t_rst_f, t_rst_e: 0.0, ..Self::reference(mode_frequency) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_rst_f >= 0.0 && self.t_rst_e >= 0.0) {
            return Err(Error::Domain("reset durations must be >= 0".into()));
        }
        self.qubit.validate()
    }

    pub fn total_duration(&self) -> f64 {
        self.t_rst_f + self.t_rst_e
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    G,
    E,
    F,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::G, Level::E, Level::F];

    pub fn as_str(&self) -> &'static str {
        match self {
            Level::G => "g",
            Level::E => "e",
            Level::F => "f",
        }
    }
}

impl std::fmt::Display for Level {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Level {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "g" | "G" | "0" => Ok(Level::G),
            "e" | "E" | "1" => Ok(Level::E),
            "f" | "F" | "2" => Ok(Level::F),
            other => Err(Error::Domain(format!("unknown level `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Populations {
    pub p_g: f64,
    pub p_e: f64,
    pub p_f: f64,
}

impl Populations {
    pub fn pure(level: Level) -> Self {
        let mut p = Self { p_g: 0.0, p_e: 0.0, p_f: 0.0 };
        match level {
            Level::G => p.p_g = 1.0,
            Level::E => p.p_e = 1.0,
            Level::F => p.p_f = 1.0,
        }
        p
    }

    pub fn total(&self) -> f64 {
        self.p_g + self.p_e + self.p_f
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeOutcome {
    pub populations: Populations,
    pub total_duration: f64,
}

/// Two sequential reset stages: f→e for `t_rst_f` with `fe`, then e→g for
/// `t_rst_e` with `eg`. Each stage moves population only within its own
/// pair of levels.
pub fn cascade_evaluate(
    schedule: &CascadeSchedule,
    fe: &ResetParams,
    eg: &ResetParams,
    initial: Populations,
) -> Result<CascadeOutcome> {
    schedule.validate()?;
    fe.validate()?;
    eg.validate()?;
    let mut p = initial;
    let keep_f = residual_excitation(fe, schedule.t_rst_f);
    let moved = p.p_f * (1.0 - keep_f);
    p.p_f -= moved;
    p.p_e += moved;
    let keep_e = residual_excitation(eg, schedule.t_rst_e);
    let moved = p.p_e * (1.0 - keep_e);
    p.p_e -= moved;
    p.p_g += moved;
    Ok(CascadeOutcome { populations: p, total_duration: schedule.total_duration() })
}

/// CSV with columns `t_seconds,p_e`.
pub fn curve_to_csv(times: &[f64], p_e: &[f64]) -> String {
    let mut out = String::from("t_seconds,p_e\n");
    for (t, p) in times.iter().zip(p_e) {
        let _ = writeln!(out, "{t:e},{p:e}");
    }
    out
}

/// Parses `t_seconds,p_e` CSV; a non-numeric first line is a header.
pub fn curve_from_csv(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut t = Vec::new();
    let mut p = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let row = (cols.len() >= 2)
            .then(|| Some((cols[0].parse::<f64>().ok()?, cols[1].parse::<f64>().ok()?)))
            .flatten();
        match row {
            Some((a, b)) => {
                t.push(a);
                p.push(b);
            }
            None if k == 0 => continue,
            None => {
                return Err(Error::Parse {
                    line: k + 1,
                    message: format!("expected `t_seconds,p_e`, got `{line}`"),
                })
            }
        }
    }
    if t.is_empty() {
        return Err(Error::Parse { line: 0, message: "no data rows".into() });
    }
    Ok((t, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ns(x: f64) -> f64 {
        x * 1e-9
    }

    #[test]
    fn regimes() {
        assert_eq!(classify_regime(&ResetParams::reference_eg()), Regime::Underdamped);
        let crit = ResetParams::new(2.125e6, 8.5e6, 0.0).unwrap();
        assert_eq!(classify_regime(&crit), Regime::CriticallyDamped);
        let zero = ResetParams::new(0.0, 8.5e6, 0.0).unwrap();
        assert_eq!(classify_regime(&zero), Regime::Overdamped);
    }

    #[test]
    fn invalid_params() {
        assert!(ResetParams::new(-1.0, 1e6, 0.0).is_err());
        assert!(ResetParams::new(1.0, 0.0, 0.0).is_err());
        assert!(ResetParams::new(1.0, 1e6, 1.0).is_err());
    }

    #[test]
    fn starts_at_one() {
        for g in [0.0, 1e6, 2.125e6, 3.9e6] {
            let p = ResetParams::new(g, 8.5e6, 0.0).unwrap();
            assert_eq!(residual_excitation(&p, 0.0), 1.0);
        }
    }

    #[test]
    fn critical_closed_form_value() {
        let kappa = 8.5e6;
        let p = ResetParams::new(kappa / 4.0, kappa, 0.0).unwrap();
        // κt = 4 in angular units
        let t = 4.0 / (2.0 * PI * kappa);
        let want = (-2.0f64).exp() * 4.0;
        assert!((residual_excitation(&p, t) - want).abs() < 1e-14);
        assert!((want - 0.5413).abs() < 1e-4);
    }

    #[test]
    fn branch_continuity() {
        let kappa = 8.5e6;
        for t in [ns(5.0), ns(40.0), ns(150.0), ns(600.0)] {
            let lo = residual_excitation(
                &ResetParams::new(kappa / 4.0 * (1.0 - 1e-6), kappa, 0.0).unwrap(),
                t,
            );
            let mid = residual_excitation(&ResetParams::new(kappa / 4.0, kappa, 0.0).unwrap(), t);
            let hi = residual_excitation(
                &ResetParams::new(kappa / 4.0 * (1.0 + 1e-6), kappa, 0.0).unwrap(),
                t,
            );
            assert!((lo - hi).abs() < 1e-4 && (lo - mid).abs() < 1e-4);
        }
    }

    #[test]
    fn oracle_limits() {
        let p = ResetParams::new(0.0, 8.5e6, 0.0).unwrap();
        for v in oracle_curve(&p, &[0.0, ns(100.0), ns(1000.0)]) {
            assert!((v - 1.0).abs() < 1e-12);
        }
        let g = 4e6;
        let p = ResetParams::new(g, 1e-3 * g, 0.0).unwrap();
        let times: Vec<f64> = (0..50).map(|k| ns(k as f64 * 3.0)).collect();
        for (t, v) in times.iter().zip(oracle_curve(&p, &times)) {
            assert!((v - (2.0 * PI * g * t).cos().powi(2)).abs() < 0.01);
        }
    }

    #[test]
    fn oracle_matches_closed_form_reference() {
        let p = ResetParams::reference_eg();
        let times: Vec<f64> = (0..200).map(|k| ns(k as f64 * 3.0)).collect();
        let exact = residual_curve(&p, &times);
        let ode = oracle_curve(&p, &times);
        for (a, b) in exact.iter().zip(&ode) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn reference_reset_below_one_percent_in_220ns() {
        let t = time_to_threshold(&ResetParams::reference_eg(), 0.01).unwrap();
        assert!(t <= ns(220.0), "{t}");
        assert!(t > ns(200.0));
        let p = ResetParams::reference_eg();
        for k in 0..2000 {
            assert!(residual_excitation(&p, t + ns(k as f64 * 0.5)) <= 0.01 + 1e-12);
        }
    }

    #[test]
    fn threshold_edge_cases() {
        let p = ResetParams::reference_eg();
        assert_eq!(time_to_threshold(&p, 1.0).unwrap(), 0.0);
        assert!(matches!(time_to_threshold(&p, 0.008), Err(Error::Unreachable { .. })));
        let over = ResetParams::new(0.5e6, 8.5e6, 0.008).unwrap();
        assert!(time_to_threshold(&over, 0.01).unwrap() > time_to_threshold(&p, 0.01).unwrap());
        let decoupled = ResetParams::new(0.0, 8.5e6, 0.0).unwrap();
        assert!(time_to_threshold(&decoupled, 0.5).is_err());
    }

    #[test]
    fn first_minimum_of_fe_curve() {
        let t = first_minimum(&ResetParams::reference_fe(), 1e-6).unwrap();
        assert!((t - ns(61.9)).abs() < ns(0.2), "{t}");
        let p = ResetParams::reference_fe().without_floor();
        assert!(residual_excitation(&p, t) < 1e-20);
    }

    #[test]
    fn noiseless_fit_is_exact() {
        let truth = ResetParams::reference_eg();
        let times: Vec<f64> = (0..300).map(|k| ns(k as f64 * 2.0)).collect();
        let data = residual_curve(&truth, &times);
        let fit = fit_reset_curve(&times, &data).unwrap();
        assert!(fit.residual_rms < 1e-10, "{}", fit.residual_rms);
        assert!((fit.params.g_qf / truth.g_qf - 1.0).abs() < 1e-6);
        assert!((fit.params.kappa_f / truth.kappa_f - 1.0).abs() < 1e-6);
        assert_eq!(fit.regime, Regime::Underdamped);
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert!(fit_reset_curve(&[0.0; 5], &[1.0; 5]).is_err());
        let t: Vec<f64> = (0..20).map(|k| k as f64 * 1e-8).collect();
        let mut y = vec![0.5; 20];
        y[3] = 1.5;
        assert!(fit_reset_curve(&t, &y).is_err());
    }

    #[test]
    fn cascade_basics() {
        let s = CascadeSchedule::reference(3.567e9);
        assert!((s.total_duration() - ns(306.0)).abs() < 1e-18);
        let fe = ResetParams::reference_fe();
        let eg = ResetParams::reference_eg();
        let out = cascade_evaluate(
            &s,
            &fe.without_floor(),
            &eg.without_floor(),
            Populations::pure(Level::G),
        )
        .unwrap();
        assert_eq!(out.populations, Populations::pure(Level::G));

        let out = cascade_evaluate(&s, &fe, &eg, Populations::pure(Level::F)).unwrap();
        assert!((out.populations.total() - 1.0).abs() < 1e-12);
        assert!(out.populations.p_g >= 0.92, "{:?}", out.populations);

        let lru = CascadeSchedule::lru(ns(62.0), 3.567e9);
        let out = cascade_evaluate(&lru, &fe, &eg, Populations::pure(Level::E)).unwrap();
        assert_eq!(out.populations, Populations::pure(Level::E));
        let out = cascade_evaluate(&lru, &fe, &eg, Populations::pure(Level::F)).unwrap();
        assert!((out.populations.p_f - 0.071).abs() < 0.005);
    }

    #[test]
    fn reset_frequency_helper() {
        let q = QubitParams::reference();
        let w = q.fe_reset_frequency(3.567e9);
        assert!((q.omega_fe(w) - 3.567e9).abs() < 1e-3);
    }

    #[test]
    fn curve_csv_round_trip() {
        let t = vec![0.0, 1e-9, 2e-9];
        let p = vec![1.0, 0.5, 0.25];
        let (t2, p2) = curve_from_csv(&curve_to_csv(&t, &p)).unwrap();
        assert_eq!((t, p), (t2, p2));
        assert!(matches!(curve_from_csv("t,p\n1,2\nx,y\n"), Err(Error::Parse { line: 3, .. })));
    }

    proptest! {
        #[test]
        fn stays_in_unit_interval(
            g in 0.0..20e6f64, kappa in 0.5e6..30e6f64, floor in 0.0..0.2f64, t in 0.0..5e-6f64
        ) {
            let p = ResetParams::new(g, kappa, floor).unwrap();
            let v = residual_excitation(&p, t);
            prop_assert!((0.0..=1.0).contains(&v));
        }

        #[test]
        fn respects_underdamped_envelope(
            kappa in 1e6..20e6f64, ratio in 0.2501..3.0f64, t in 0.0..2e-6f64
        ) {
            let p = ResetParams::new(ratio * kappa, kappa, 0.0).unwrap();
            prop_assume!(classify_regime(&p) == Regime::Underdamped);
            prop_assert!(residual_excitation(&p, t) <= underdamped_envelope(&p, t) * (1.0 + 1e-12));
        }
    }
}
