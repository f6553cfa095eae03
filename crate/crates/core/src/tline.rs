//! Lossless transmission-line primitives and ABCD two-port algebra.
//!
//! Every public frequency argument is an ordinary frequency in Hz; angular
//! frequency is formed internally.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Trigonometric values below this magnitude are treated as exact zeros
/// (notches) or exact poles.
pub const ZERO_TOL: f64 = 1e-12;

const J: Complex64 = Complex64::new(0.0, 1.0);

/// A value that is either finite or sits on a pole of the network function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Response {
    Finite(Complex64),
    Pole,
}

impl Response {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            Response::Finite(z) => Some(z),
            Response::Pole => None,
        }
    }

    pub fn is_pole(&self) -> bool {
        matches!(self, Response::Pole)
    }

    /// Magnitude, with a pole mapped to `+inf`.
    pub fn norm(&self) -> f64 {
        match self {
            Response::Finite(z) => z.norm(),
            Response::Pole => f64::INFINITY,
        }
    }
}

/// Uniform lossless line: characteristic impedance, phase velocity, length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSpec {
    pub z0: f64,
    pub v_phase: f64,
    pub length: f64,
}

impl LineSpec {
    pub fn new(z0: f64, v_phase: f64, length: f64) -> Result<Self> {
        let line = Self { z0, v_phase, length };
        line.validate()?;
        Ok(line)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.z0 > 0.0 && self.z0.is_finite()) {
            return Err(Error::Domain(format!("z0 must be > 0, got {}", self.z0)));
        }
        if !(self.v_phase > 0.0 && self.v_phase.is_finite()) {
            return Err(Error::Domain(format!("phase velocity must be > 0, got {}", self.v_phase)));
        }
        if !(self.length >= 0.0 && self.length.is_finite()) {
            return Err(Error::Domain(format!("length must be >= 0, got {}", self.length)));
        }
        Ok(())
    }

    /// Same medium, different length.
    pub fn with_length(&self, length: f64) -> Self {
        Self { length, ..*self }
    }

    /// Electrical length βl in radians.
    pub fn electrical_length(&self, f: f64) -> f64 {
        2.0 * PI * f / self.v_phase * self.length
    }

    /// Frequency at which this line is a quarter wavelength long.
    pub fn quarter_wave_frequency(&self) -> f64 {
        self.v_phase / (4.0 * self.length)
    }
}

/// β = 2πf / v in rad/m.
pub fn propagation_constant(f: f64, v_phase: f64) -> Result<f64> {
    if !(v_phase > 0.0) {
        return Err(Error::Domain(format!("phase velocity must be > 0, got {v_phase}")));
    }
    if !(f >= 0.0) {
        return Err(Error::Domain(format!("frequency must be >= 0, got {f}")));
    }
    Ok(2.0 * PI * f / v_phase)
}

/// Chain (ABCD) matrix of a two-port.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Abcd {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Abcd {
    pub fn identity() -> Self {
        Self {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            c: Complex64::new(0.0, 0.0),
            d: Complex64::new(1.0, 0.0),
        }
    }

    pub fn determinant(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    /// `self` followed by `next`.
    pub fn cascade(&self, next: &Abcd) -> Abcd {
        cascade(self, next)
    }

    /// Input impedance with the output port left open (I₂ = 0).
    pub fn open_circuit_input_impedance(&self) -> Response {
        if self.c.norm() < ZERO_TOL * self.a.norm().max(f64::MIN_POSITIVE) {
            Response::Pole
        } else {
            Response::Finite(self.a / self.c)
        }
    }

    pub fn max_abs_diff(&self, other: &Abcd) -> f64 {
        [self.a - other.a, self.b - other.b, self.c - other.c, self.d - other.d]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Matrix product `m1·m2`.
pub fn cascade(m1: &Abcd, m2: &Abcd) -> Abcd {
    Abcd {
        a: m1.a * m2.a + m1.b * m2.c,
        b: m1.a * m2.b + m1.b * m2.d,
        c: m1.c * m2.a + m1.d * m2.c,
        d: m1.c * m2.b + m1.d * m2.d,
    }
}

/// Series capacitor `[[1, 1/(jωC)], [0, 1]]`.
pub fn abcd_series_capacitor(capacitance: f64, f: f64) -> Result<Abcd> {
    if !(capacitance > 0.0) {
        return Err(Error::Domain(format!("capacitance must be > 0, got {capacitance}")));
    }
    if !(f > 0.0) {
        return Err(Error::Domain("series capacitor has infinite impedance at DC".into()));
    }
    let omega = 2.0 * PI * f;
    Ok(Abcd { b: 1.0 / (J * omega * capacitance), ..Abcd::identity() })
}

/// Lossless line two-port: `a = d = cos βl`, `b = j z0 sin βl`, `c = j sin βl / z0`.
pub fn abcd_line(line: &LineSpec, f: f64) -> Abcd {
    let theta = line.electrical_length(f);
    let (s, c) = theta.sin_cos();
    Abcd {
        a: Complex64::new(c, 0.0),
        b: J * line.z0 * s,
        c: J * s / line.z0,
        d: Complex64::new(c, 0.0),
    }
}

/// Input impedance `Z0 / (j tan βl)` of an open-circuited stub.
///
/// Exactly zero at odd multiples of π/2; a [`Response::Pole`] at multiples of π.
pub fn open_stub_impedance(line: &LineSpec, f: f64) -> Result<Response> {
    if !(f > 0.0) {
        return Err(Error::Domain(format!("frequency must be > 0, got {f}")));
    }
    let (s, c) = line.electrical_length(f).sin_cos();
    if s.abs() < ZERO_TOL {
        return Ok(Response::Pole);
    }
    if c.abs() < ZERO_TOL {
        return Ok(Response::Finite(Complex64::new(0.0, 0.0)));
    }
    Ok(Response::Finite(-J * line.z0 * c / s))
}

/// Ratio `V(z₁)/V(z₂) = cos βz₁ / cos βz₂` of the standing wave on an
/// open-terminated line, distances measured from the open end.
pub fn open_line_voltage_ratio(z1: f64, z2: f64, line: &LineSpec, f: f64) -> Result<Response> {
    if !(z1 >= 0.0 && z2 >= 0.0) {
        return Err(Error::Domain("distances must be >= 0".into()));
    }
    let beta = propagation_constant(f, line.v_phase)?;
    let num = (beta * z1).cos();
    let den = (beta * z2).cos();
    if den.abs() < ZERO_TOL {
        return Ok(Response::Pole);
    }
    let num = if num.abs() < ZERO_TOL { 0.0 } else { num };
    Ok(Response::Finite(Complex64::new(num / den, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const V: f64 = 1.19e8;

    fn line(length: f64) -> LineSpec {
        LineSpec::new(50.0, V, length).unwrap()
    }

    #[test]
    fn beta_examples() {
        assert_eq!(propagation_constant(0.0, V).unwrap(), 0.0);
        let l = 3.7e-3;
        let beta = propagation_constant(V / (4.0 * l), V).unwrap();
        assert!((beta * l - PI / 2.0).abs() < 1e-15);
        // 2π·5e9/1.19e8 = 263.998...
        let b = propagation_constant(5e9, 1.19e8).unwrap();
        assert!((b - 264.0).abs() < 0.05, "{b}");
        assert!(propagation_constant(1e9, 0.0).is_err());
        assert!(propagation_constant(1e9, -1.0).is_err());
    }

    #[test]
    fn series_capacitor_values() {
        let m = abcd_series_capacitor(10e-15, 5e9).unwrap();
        assert!((m.b - Complex64::new(0.0, -3183.0988618379)).norm() < 1e-6);
        assert_eq!(m.a, Complex64::new(1.0, 0.0));
        assert_eq!(m.c, Complex64::new(0.0, 0.0));
        assert!((m.determinant() - 1.0).norm() < 1e-15);
        let big = abcd_series_capacitor(1.0, 5e9).unwrap();
        assert!(big.max_abs_diff(&Abcd::identity()) < 1e-10);
        assert!(abcd_series_capacitor(1e-15, 0.0).is_err());
        assert!(abcd_series_capacitor(0.0, 1e9).is_err());
    }

    #[test]
    fn line_special_lengths() {
        assert!(abcd_line(&line(0.0), 5e9).max_abs_diff(&Abcd::identity()) < 1e-15);
        let l = 5e-3;
        let q = abcd_line(&line(l), V / (4.0 * l));
        assert!(q.a.norm() < 1e-15 && q.d.norm() < 1e-15);
        assert!((q.b - Complex64::new(0.0, 50.0)).norm() < 1e-12);
        assert!((q.c - Complex64::new(0.0, 1.0 / 50.0)).norm() < 1e-15);
    }

    #[test]
    fn cascade_identity_and_halves() {
        let m = abcd_line(&line(4e-3), 3.3e9);
        assert!(cascade(&Abcd::identity(), &m).max_abs_diff(&m) < 1e-15);
        let half = abcd_line(&line(2e-3), 3.3e9);
        assert!(cascade(&half, &half).max_abs_diff(&m) < 1e-12);
    }

    #[test]
    fn stub_zero_pole_and_45_degrees() {
        let l = 6e-3;
        let f_q = V / (4.0 * l);
        assert_eq!(
            open_stub_impedance(&line(l), f_q).unwrap(),
            Response::Finite(Complex64::new(0.0, 0.0))
        );
        assert_eq!(open_stub_impedance(&line(l), 2.0 * f_q).unwrap(), Response::Pole);
        let z = open_stub_impedance(&line(l), f_q / 2.0).unwrap().finite().unwrap();
        assert!((z - Complex64::new(0.0, -50.0)).norm() < 1e-9);
        // short stub approaches -j Z0 / βl
        let tiny = line(1e-9);
        let z = open_stub_impedance(&tiny, 1e9).unwrap().finite().unwrap();
        let bl = tiny.electrical_length(1e9);
        assert!(z.re.abs() < 1e-9 && (z.im / (-50.0 / bl) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn voltage_ratio_examples() {
        let ln = line(1.0);
        let f = 1e9;
        let beta = propagation_constant(f, V).unwrap();
        let r = open_line_voltage_ratio(2e-3, 2e-3, &ln, f).unwrap().finite().unwrap();
        assert!((r - 1.0).norm() < 1e-15);
        let node = PI / 2.0 / beta;
        let r = open_line_voltage_ratio(node, 0.0, &ln, f).unwrap().finite().unwrap();
        assert_eq!(r.norm(), 0.0);
        let r = open_line_voltage_ratio(PI / 3.0 / beta, 0.0, &ln, f).unwrap().finite().unwrap();
        assert!((r.re - 0.5).abs() < 1e-14);
        assert!(open_line_voltage_ratio(0.0, node, &ln, f).unwrap().is_pole());
    }

    #[test]
    fn stub_zeros_and_poles_follow_electrical_length() {
        let l = 7e-3;
        let f_q = V / (4.0 * l);
        for k in 0..6 {
            let odd = (2 * k + 1) as f64 * f_q;
            let z = open_stub_impedance(&line(l), odd).unwrap();
            assert_eq!(z.norm(), 0.0, "zero at (2k+1)π/2, k={k}");
            let even = (2 * k + 2) as f64 * f_q;
            assert!(open_stub_impedance(&line(l), even).unwrap().is_pole(), "pole at kπ");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn produced_matrices_are_unimodular(
            len in 0.0..0.05f64, f in 1e6..2e10f64, z0 in 5.0..200.0f64, c in 1e-16..1e-12f64
        ) {
            let ln = LineSpec::new(z0, V, len).unwrap();
            let m = abcd_line(&ln, f);
            prop_assert!((m.determinant() - 1.0).norm() < 1e-12);
            let s = abcd_series_capacitor(c, f).unwrap();
            prop_assert!((s.determinant() - 1.0).norm() < 1e-12);
            let both = cascade(&m, &s);
            prop_assert!((both.determinant() - 1.0).norm() < 1e-12 * both.b.norm().max(1.0));
        }

        #[test]
        fn cascade_is_phase_additive(
            l1 in 0.0..0.03f64, l2 in 0.0..0.03f64, f in 1e8..1e10f64
        ) {
            let joined = abcd_line(&line(l1 + l2), f);
            let chained = cascade(&abcd_line(&line(l1), f), &abcd_line(&line(l2), f));
            let scale = [joined.a, joined.b / 50.0, joined.c * 50.0, joined.d]
                .iter().map(|z| z.norm()).fold(1.0, f64::max);
            prop_assert!((joined.a - chained.a).norm() < 1e-12 * scale);
            prop_assert!((joined.b - chained.b).norm() < 1e-12 * scale * 50.0);
            prop_assert!((joined.c - chained.c).norm() < 1e-12 * scale / 50.0);
            prop_assert!((joined.d - chained.d).norm() < 1e-12 * scale);
        }

        #[test]
        fn stub_matches_open_terminated_abcd(
            len in 1e-4..0.05f64, f in 1e7..1.5e10f64
        ) {
            let ln = line(len);
            let theta = ln.electrical_length(f);
            // stay away from the poles at kπ
            prop_assume!(theta.sin().abs() > 1e-3);
            let direct = open_stub_impedance(&ln, f).unwrap().finite().unwrap();
            let reduced = abcd_line(&ln, f).open_circuit_input_impedance().finite().unwrap();
            prop_assert!((direct - reduced).norm() <= 1e-10 * reduced.norm().max(1e-3));
        }
    }
}
