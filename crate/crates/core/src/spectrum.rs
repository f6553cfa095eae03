//! Input–output model of a band-pass filter mode loaded by readout
//! resonators, and its dB-domain least-squares fit.
//!
//! ```text
//!                     −j κ_f/2
//! S21 = ─────────────────────────────────────────────
//!       (jΔ_fd + κ_f/2) + Σᵢ |g_i|² / (jΔ_rᵢd + γ_i/2)
//! ```
//!
//! with `Δ_fd = ω_f − ω_d` and `Δ_rᵢd = ω_rᵢ − ω_d`. Every term is linear in
//! frequency, so the ratio is the same whether frequencies are angular or
//! ordinary; all parameters here are ordinary frequencies in Hz.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lm::{levenberg_marquardt, LmOptions};
use crate::network::read_touchstone;

/// Magnitudes below this (in dB) are clamped, guarding `log10(0)`.
pub const DB_FLOOR: f64 = -200.0;

/// Initial intrinsic loss assumed for each resonator.
pub const DEFAULT_GAMMA_GUESS: f64 = 100e3;

/// Dips shallower than this (dB of prominence) are not considered resonators.
pub const MIN_DIP_PROMINENCE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resonator {
    pub omega_r: f64,
    pub g_fr: f64,
    pub gamma_r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct S21ModelParams {
    pub omega_f: f64,
    pub kappa_f: f64,
    #[serde(default)]
    pub resonators: Vec<Resonator>,
    /// Background slope in dB per Hz.
    #[serde(default)]
    pub background_k: f64,
    /// Background offset in dB.
    #[serde(default)]
    pub background_b: f64,
}

impl S21ModelParams {
    pub fn bare(omega_f: f64, kappa_f: f64) -> Self {
        Self { omega_f, kappa_f, resonators: Vec::new(), background_k: 0.0, background_b: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa_f > 0.0 && self.kappa_f.is_finite()) {
            return Err(Error::Domain(format!("kappa_f must be > 0, got {}", self.kappa_f)));
        }
        if !self.omega_f.is_finite() {
            return Err(Error::Domain("omega_f must be finite".into()));
        }
        for r in &self.resonators {
            if !(r.gamma_r >= 0.0) {
                return Err(Error::Domain(format!("gamma_r must be >= 0, got {}", r.gamma_r)));
            }
        }
        Ok(())
    }
}

pub fn s21_model(p: &S21ModelParams, f: f64) -> Complex64 {
    let j = Complex64::new(0.0, 1.0);
    let mut den = j * (p.omega_f - f) + p.kappa_f / 2.0;
    for r in &p.resonators {
        let g2 = r.g_fr * r.g_fr;
        let d = j * (r.omega_r - f) + r.gamma_r / 2.0;
        if d == Complex64::new(0.0, 0.0) {
            if g2 > 0.0 {
                // probe exactly on a lossless resonator: complete extinction
                return Complex64::new(0.0, 0.0);
            }
            continue;
        }
        den += g2 / d;
    }
    -j * (p.kappa_f / 2.0) / den
}

/// `20 log10|S21| + k f + b`, with the log term floored at [`DB_FLOOR`].
pub fn s21_db_with_background(p: &S21ModelParams, f: f64) -> f64 {
    let mag = s21_model(p, f).norm();
    let db = if mag > 0.0 { (20.0 * mag.log10()).max(DB_FLOOR) } else { DB_FLOOR };
    db + p.background_k * f + p.background_b
}

/// Measured transmission magnitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumData {
    pub frequencies: Vec<f64>,
    pub s21_db: Vec<f64>,
}

impl SpectrumData {
    pub fn new(frequencies: Vec<f64>, s21_db: Vec<f64>) -> Result<Self> {
        let d = Self { frequencies, s21_db };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.frequencies.len() != self.s21_db.len() {
            return Err(Error::Domain(format!(
                "{} frequencies but {} values",
                self.frequencies.len(),
                self.s21_db.len()
            )));
        }
        if self.frequencies.is_empty() {
            return Err(Error::Domain("empty spectrum".into()));
        }
        if self.frequencies.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("frequencies must be strictly increasing".into()));
        }
        if self.s21_db.iter().chain(&self.frequencies).any(|x| !x.is_finite()) {
            return Err(Error::Domain("spectrum contains non-finite values".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Parses `f_hz,s21_db` CSV; a non-numeric first line is taken as a header.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut f = Vec::new();
        let mut db = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed = (cols.len() >= 2)
                .then(|| Some((cols[0].parse::<f64>().ok()?, cols[1].parse::<f64>().ok()?)))
                .flatten();
            match parsed {
                Some((x, y)) => {
                    f.push(x);
                    db.push(y);
                }
                None if f.is_empty() && k == 0 => continue,
                None => {
                    return Err(Error::Parse {
                        line: k + 1,
                        message: format!("expected `f_hz,s21_db`, got `{line}`"),
                    })
                }
            }
        }
        if f.is_empty() {
            return Err(Error::Parse { line: 0, message: "no data rows".into() });
        }
        Self::new(f, db)
    }

    /// `|S21|` in dB from a two-port Touchstone file.
    pub fn from_touchstone(text: &str) -> Result<Self> {
        let t = read_touchstone(text, 2)?;
        let (f, db) = t
            .points
            .iter()
            .map(|p| {
                let m = p.s[(1, 0)].norm();
                (p.frequency, if m > 0.0 { (20.0 * m.log10()).max(DB_FLOOR) } else { DB_FLOOR })
            })
            .unzip();
        Self::new(f, db)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("f_hz,s21_db\n");
        for (f, y) in self.frequencies.iter().zip(&self.s21_db) {
            out.push_str(&format!("{f:e},{y:e}\n"));
        }
        out
    }

    /// Sub-spectrum with `lo ≤ f ≤ hi`.
    pub fn window(&self, lo: f64, hi: f64) -> Result<Self> {
        let (f, db): (Vec<f64>, Vec<f64>) = self
            .frequencies
            .iter()
            .zip(&self.s21_db)
            .filter(|(f, _)| **f >= lo && **f <= hi)
            .map(|(a, b)| (*a, *b))
            .unzip();
        Self::new(f, db)
    }
}

/// Index of a local extremum together with its topographic prominence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub index: usize,
    pub prominence: f64,
}

/// Interior local minima of `y`, most prominent first. A minimum's
/// prominence is how far `y` must rise before reaching lower ground on
/// the lower of its two sides.
pub fn local_minima(y: &[f64]) -> Vec<Extremum> {
    let n = y.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if y[i] < y[i - 1] {
            // flat-bottomed minima count once, at their first sample
            let mut j = i;
            while j + 1 < n && y[j + 1] == y[i] {
                j += 1;
            }
            if j + 1 < n && y[j + 1] > y[i] {
                let side = |range: &mut dyn Iterator<Item = usize>| {
                    let mut top = y[i];
                    for k in range {
                        if y[k] < y[i] {
                            return top;
                        }
                        top = top.max(y[k]);
                    }
                    top
                };
                let left = side(&mut (0..i).rev());
                let right = side(&mut (j + 1..n));
                out.push(Extremum { index: i, prominence: left.min(right) - y[i] });
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out.sort_by(|a, b| b.prominence.total_cmp(&a.prominence));
    out
}

/// Interior local maxima, most prominent first.
pub fn local_maxima(y: &[f64]) -> Vec<Extremum> {
    let neg: Vec<f64> = y.iter().map(|v| -v).collect();
    local_minima(&neg)
}

fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let xm = x.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - xm).powi(2)).sum();
    if sxx == 0.0 {
        return (0.0, ym);
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let k = sxy / sxx;
    (k, ym - k * xm)
}

/// Fraction of the band on each side used to estimate the background slope.
const OUTER_FRACTION: f64 = 0.1;

/// Starting point for [`fit_s21`] from a spectrum containing one filter mode.
///
/// The background slope comes from a linear fit to the outer 10% of the
/// band on each side; the offset is then chosen so the model peak (0 dB)
/// lands on the measured maximum. `ω_f` sits at the maximum of the
/// detrended data, `κ_f` is its −3 dB width, and resonators start at the
/// `n_resonators` most prominent dips.
pub fn auto_initial_guess(data: &SpectrumData, n_resonators: usize) -> Result<S21ModelParams> {
    data.validate()?;
    let n = data.len();
    if n < 5 {
        return Err(Error::NoPeak(format!("only {n} points")));
    }
    let f = &data.frequencies;
    let y = &data.s21_db;
    let edge = ((n as f64 * OUTER_FRACTION).ceil() as usize).max(2).min(n / 2);
    let (xs, ys): (Vec<f64>, Vec<f64>) = f[..edge]
        .iter()
        .chain(&f[n - edge..])
        .copied()
        .zip(y[..edge].iter().chain(&y[n - edge..]).copied())
        .unzip();
    let (k, b0) = linear_fit(&xs, &ys);
    let d: Vec<f64> = f.iter().zip(y).map(|(f, y)| y - (k * f + b0)).collect();
    let (i_peak, &d_peak) =
        d.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty");
    if d_peak < 3.0 {
        return Err(Error::NoPeak(format!(
            "maximum is only {d_peak:.3} dB above the band-edge background"
        )));
    }
    let omega_f = f[i_peak];

    // −3 dB crossings, taking the outermost samples above the level so that
    // dips inside the pass band do not shorten the width
    let level = d_peak - 3.0;
    let crossing = |i: usize, j: usize| {
        let t = (level - d[i]) / (d[j] - d[i]);
        f[i] + t * (f[j] - f[i])
    };
    let first = d.iter().position(|&v| v >= level).expect("peak is above level");
    let last = d.iter().rposition(|&v| v >= level).expect("peak is above level");
    let lo = if first > 0 { crossing(first - 1, first) } else { f[0] };
    let hi = if last + 1 < n { crossing(last, last + 1) } else { f[n - 1] };
    let kappa_f = (hi - lo).max(f[1] - f[0]);

    let mut resonators = Vec::with_capacity(n_resonators);
    if n_resonators > 0 {
        let dips: Vec<Extremum> =
            local_minima(&d).into_iter().filter(|e| e.prominence >= MIN_DIP_PROMINENCE).collect();
        if dips.len() < n_resonators {
            return Err(Error::TooFewDips {
                wanted: n_resonators,
                found: dips.iter().map(|e| f[e.index]).collect(),
            });
        }
        let mut chosen: Vec<&Extremum> = dips.iter().take(n_resonators).collect();
        chosen.sort_by_key(|e| e.index);
        for e in chosen {
            let i = e.index;
            // half-width where the dip has recovered half its prominence
            let half = d[i] + e.prominence / 2.0;
            let mut a = i;
            while a > 0 && d[a] < half {
                a -= 1;
            }
            let mut z = i;
            while z + 1 < n && d[z] < half {
                z += 1;
            }
            let hw = ((f[z] - f[a]) / 2.0).max(f[1] - f[0]);
            let detuning = Complex64::new(kappa_f / 2.0, omega_f - f[i]).norm();
            resonators.push(Resonator {
                omega_r: f[i],
                g_fr: (hw * detuning).sqrt(),
                gamma_r: DEFAULT_GAMMA_GUESS,
            });
        }
    }
    let mut p = S21ModelParams { omega_f, kappa_f, resonators, background_k: k, background_b: 0.0 };
    let model_peak = s21_db_with_background(&p, omega_f);
    p.background_b = y[i_peak] - model_peak;
    Ok(p)
}

/// Window of `±half_widths · κ_f` around a guessed mode.
pub fn default_window(guess: &S21ModelParams, half_widths: f64) -> (f64, f64) {
    let w = half_widths * guess.kappa_f;
    (guess.omega_f - w, guess.omega_f + w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: S21ModelParams,
    /// One-sigma errors, laid out like `params`.
    pub std_errors: S21ModelParams,
    pub residual_rms: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Internal order-one parametrisation around a reference point.
struct Scaling {
    f_ref: f64,
    scale: f64,
    span: f64,
    n_res: usize,
}

impl Scaling {
    fn encode(&self, p: &S21ModelParams) -> Vec<f64> {
        let mut v = vec![(p.omega_f - self.f_ref) / self.scale, p.kappa_f / self.scale];
        for r in &p.resonators {
            v.push((r.omega_r - self.f_ref) / self.scale);
            v.push(r.g_fr / self.scale);
            v.push(r.gamma_r / self.scale);
        }
        v.push(p.background_k * self.span);
        v.push(p.background_k * self.f_ref + p.background_b);
        v
    }

    fn decode(&self, v: &[f64]) -> S21ModelParams {
        let k = v[2 + 3 * self.n_res] / self.span;
        let b_ref = v[3 + 3 * self.n_res];
        S21ModelParams {
            omega_f: self.f_ref + v[0] * self.scale,
            kappa_f: (v[1] * self.scale).abs(),
            resonators: (0..self.n_res)
                .map(|i| Resonator {
                    omega_r: self.f_ref + v[2 + 3 * i] * self.scale,
                    g_fr: (v[3 + 3 * i] * self.scale).abs(),
                    gamma_r: (v[4 + 3 * i] * self.scale).abs(),
                })
                .collect(),
            background_k: k,
            background_b: b_ref - k * self.f_ref,
        }
    }

    /// Propagates the encoded covariance to one-sigma errors in physical units.
    fn errors(&self, cov: &[f64]) -> S21ModelParams {
        let n = 4 + 3 * self.n_res;
        let sd = |i: usize| {
            if cov.is_empty() {
                f64::NAN
            } else {
                cov[i * n + i].max(0.0).sqrt()
            }
        };
        let (ik, ib) = (n - 2, n - 1);
        // b = b_ref − (v_k / span)·f_ref
        let c = self.f_ref / self.span;
        let var_b = if cov.is_empty() {
            f64::NAN
        } else {
            cov[ib * n + ib] + c * c * cov[ik * n + ik] - 2.0 * c * cov[ib * n + ik]
        };
        S21ModelParams {
            omega_f: sd(0) * self.scale,
            kappa_f: sd(1) * self.scale,
            resonators: (0..self.n_res)
                .map(|i| Resonator {
                    omega_r: sd(2 + 3 * i) * self.scale,
                    g_fr: sd(3 + 3 * i) * self.scale,
                    gamma_r: sd(4 + 3 * i) * self.scale,
                })
                .collect(),
            background_k: sd(ik) / self.span,
            background_b: var_b.max(0.0).sqrt(),
        }
    }
}

/// Damped least squares of the dB-domain residual, starting at `initial`.
pub fn fit_s21(data: &SpectrumData, initial: &S21ModelParams) -> Result<FitResult> {
    fit_s21_with(data, initial, &LmOptions::default())
}

pub fn fit_s21_with(
    data: &SpectrumData,
    initial: &S21ModelParams,
    opts: &LmOptions,
) -> Result<FitResult> {
    data.validate()?;
    initial.validate()?;
    let n_res = initial.resonators.len();
    let n_params = 4 + 3 * n_res;
    if data.len() < n_params {
        return Err(Error::Domain(format!(
            "{} points cannot constrain {n_params} parameters",
            data.len()
        )));
    }
    let first = data.frequencies[0];
    let last = data.frequencies[data.len() - 1];
    let scaling = Scaling {
        f_ref: initial.omega_f,
        scale: initial.kappa_f,
        span: (last - first).max(initial.kappa_f),
        n_res,
    };
    let residuals = |v: &[f64]| -> Vec<f64> {
        let p = scaling.decode(v);
        data.frequencies
            .iter()
            .zip(&data.s21_db)
            .map(|(&f, &y)| s21_db_with_background(&p, f) - y)
            .collect()
    };
    let res = levenberg_marquardt(residuals, &scaling.encode(initial), opts);
    Ok(FitResult {
        params: scaling.decode(&res.params),
        std_errors: scaling.errors(&res.covariance),
        residual_rms: res.residual_rms,
        converged: res.converged,
        iterations: res.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
    }

    fn synth(p: &S21ModelParams, f: &[f64]) -> SpectrumData {
        SpectrumData::new(f.to_vec(), f.iter().map(|&x| s21_db_with_background(p, x)).collect())
            .unwrap()
    }

    #[test]
    fn bare_filter_on_resonance() {
        let p = S21ModelParams::bare(3.567e9, 5.4e6);
        let s = s21_model(&p, 3.567e9);
        assert!((s - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!(s21_model(&p, 3.567e9 + 1e12).norm() < 1e-5);
    }

    #[test]
    fn total_dip_at_lossless_resonator() {
        let mut p = S21ModelParams::bare(6.583e9, 20.2e6);
        p.resonators.push(Resonator { omega_r: 6.6e9, g_fr: 5e6, gamma_r: 0.0 });
        assert_eq!(s21_model(&p, 6.6e9).norm(), 0.0);
        assert_eq!(s21_db_with_background(&p, 6.6e9), DB_FLOOR);
    }

    #[test]
    fn background_terms() {
        let mut p = S21ModelParams::bare(5e9, 10e6);
        let f = 5.003e9;
        let plain = 20.0 * s21_model(&p, f).norm().log10();
        assert_eq!(s21_db_with_background(&p, f), plain);
        p.background_b = 3.0;
        assert!((s21_db_with_background(&p, f) - plain - 3.0).abs() < 1e-12);
        p.background_b = 0.0;
        p.background_k = 1e-9;
        let tilt = s21_db_with_background(&p, 6e9)
            - 20.0 * s21_model(&p, 6e9).norm().log10()
            - (s21_db_with_background(&p, 5e9) - 20.0 * s21_model(&p, 5e9).norm().log10());
        assert!((tilt - 1.0).abs() < 1e-9);
    }

    #[test]
    fn extrema_prominence() {
        let y = [0.0, -1.0, 0.0, -5.0, -2.0, -3.0, 1.0];
        let m = local_minima(&y);
        assert_eq!(m.len(), 3);
        assert_eq!(m[0].index, 3);
        assert_eq!(m[0].prominence, 5.0);
        let m1 = m.iter().find(|e| e.index == 1).unwrap();
        assert_eq!(m1.prominence, 1.0);
        let m5 = m.iter().find(|e| e.index == 5).unwrap();
        assert_eq!(m5.prominence, 1.0);
        let peaks: Vec<usize> = local_maxima(&y).iter().map(|e| e.index).collect();
        assert_eq!(peaks.len(), 2);
        assert!(peaks.contains(&2) && peaks.contains(&4));
    }

    #[test]
    fn guess_bare_filter_within_ten_percent() {
        let truth = S21ModelParams {
            background_k: 2e-9,
            background_b: -7.0,
            ..S21ModelParams::bare(3.567e9, 5.4e6)
        };
        let f = grid(3.567e9 - 54e6, 3.567e9 + 54e6, 1001);
        let g = auto_initial_guess(&synth(&truth, &f), 0).unwrap();
        assert!((g.omega_f - truth.omega_f).abs() < 0.1 * truth.kappa_f);
        assert!((g.kappa_f / truth.kappa_f - 1.0).abs() < 0.1, "{}", g.kappa_f);
    }

    #[test]
    fn flat_spectrum_has_no_peak() {
        let f = grid(1e9, 2e9, 100);
        let data = SpectrumData::new(f, vec![0.0; 100]).unwrap();
        assert!(matches!(auto_initial_guess(&data, 0), Err(Error::NoPeak(_))));
    }

    #[test]
    fn guess_finds_single_dip() {
        let mut truth = S21ModelParams::bare(6.583e9, 20.2e6);
        truth.resonators.push(Resonator { omega_r: 6.6e9, g_fr: 5e6, gamma_r: 0.2e6 });
        let f = grid(6.583e9 - 202e6, 6.583e9 + 202e6, 2001);
        let step = f[1] - f[0];
        let g = auto_initial_guess(&synth(&truth, &f), 1).unwrap();
        assert!((g.resonators[0].omega_r - 6.6e9).abs() <= step * 1.0001);
        assert!(matches!(
            auto_initial_guess(&synth(&truth, &f), 2),
            Err(Error::TooFewDips { wanted: 2, ref found }) if found.len() == 1
        ));
    }

    #[test]
    fn fixed_point_converges_fast() {
        let mut truth = S21ModelParams::bare(6.583e9, 20.2e6);
        truth.resonators.push(Resonator { omega_r: 6.62e9, g_fr: 6e6, gamma_r: 0.3e6 });
        truth.background_k = -1e-9;
        truth.background_b = 2.0;
        let f = grid(6.4e9, 6.75e9, 701);
        let r = fit_s21(&synth(&truth, &f), &truth).unwrap();
        assert!(r.converged);
        assert!(r.iterations <= 3);
        assert!(r.residual_rms < 1e-8);
    }

    #[test]
    fn noiseless_fit_from_guess() {
        let truth = S21ModelParams {
            background_k: 1e-9,
            background_b: -3.5,
            ..S21ModelParams::bare(3.567e9, 5.4e6)
        };
        let f = grid(3.567e9 - 54e6, 3.567e9 + 54e6, 801);
        let data = synth(&truth, &f);
        let r = fit_s21(&data, &auto_initial_guess(&data, 0).unwrap()).unwrap();
        assert!(r.converged);
        assert!((r.params.omega_f / truth.omega_f - 1.0).abs() < 1e-9);
        assert!((r.params.kappa_f / truth.kappa_f - 1.0).abs() < 1e-6);
        assert!((r.params.background_b - truth.background_b).abs() < 1e-4);
        assert!(r.std_errors.kappa_f >= 0.0);
    }

    #[test]
    fn csv_parsing() {
        let d = SpectrumData::from_csv("f_hz,s21_db\n1e9,-3\n2e9,-4\n").unwrap();
        assert_eq!(d.frequencies, vec![1e9, 2e9]);
        assert!(matches!(
            SpectrumData::from_csv("f_hz,s21_db\n1e9,-3\n2e9,x\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(SpectrumData::from_csv("").is_err());
        assert!(SpectrumData::from_csv("2e9,1\n1e9,1\n").is_err());
        let back = SpectrumData::from_csv(&d.to_csv()).unwrap();
        assert_eq!(back, d);
    }

    proptest! {
        #[test]
        fn bare_response_symmetric_and_monotone(
            f0 in 1e9..8e9f64, kappa in 1e5..1e8f64, d1 in 0.0..5.0f64, d2 in 0.0..5.0f64
        ) {
            let p = S21ModelParams::bare(f0, kappa);
            let (a, b) = (d1 * kappa, d2 * kappa);
            let up = s21_model(&p, f0 + a).norm();
            let down = s21_model(&p, f0 - a).norm();
            prop_assert!((up - down).abs() < 1e-12);
            if (a - b).abs() > 1e-6 * kappa {
                let (near, far) = if a < b { (a, b) } else { (b, a) };
                prop_assert!(s21_model(&p, f0 + near).norm() > s21_model(&p, f0 + far).norm());
            }
        }
    }
}
