//! Single-shot dispersive readout: Gaussian blobs, maximum-likelihood
//! assignment and the split of readout error into separation error
//! (blob overlap) and state error (the qubit was not where it was
//! prepared).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::reset::Level;

/// Minimum number of shots per prepared state for a blob fit.
pub const MIN_SHOTS_PER_LABEL: usize = 100;

/// Planck constant, J·s (exact since the 2019 SI).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Boltzmann constant, J/K (exact since the 2019 SI).
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Measured assignment error of the reference device with `|g⟩` prepared.
pub const REFERENCE_EPSILON_0: f64 = 0.0108;
/// Measured assignment error with `|e⟩` prepared.
pub const REFERENCE_EPSILON_1: f64 = 0.0886;
/// Separation error of the `|g⟩` blob.
pub const REFERENCE_EPSILON_S0: f64 = 0.0038;
/// Separation error of the `|e⟩` blob.
pub const REFERENCE_EPSILON_S1: f64 = 0.0008;

/// Absolute accuracy of the overlap integrals.
pub const OVERLAP_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shot {
    pub label: Level,
    pub i: f64,
    pub q: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IQShotSet {
    pub shots: Vec<Shot>,
}

impl IQShotSet {
    pub fn new(shots: Vec<Shot>) -> Self {
        Self { shots }
    }

    /// Prepared states present, in `g, e, f` order.
    pub fn labels(&self) -> Vec<Level> {
        Level::ALL.into_iter().filter(|l| self.shots.iter().any(|s| s.label == *l)).collect()
    }

    pub fn count(&self, label: Level) -> usize {
        self.shots.iter().filter(|s| s.label == label).count()
    }

    pub fn of(&self, label: Level) -> impl Iterator<Item = &Shot> {
        self.shots.iter().filter(move |s| s.label == label)
    }

    /// Parses `label,i,q` rows; a first line that does not parse is a header.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut shots = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match parse_row(line) {
                Some(shot) => shots.push(shot),
                None if k == 0 => continue,
                None => {
                    return Err(Error::Parse {
                        line: k + 1,
                        message: format!("expected `label,i,q` with label g, e or f, got `{line}`"),
                    })
                }
            }
        }
        if shots.is_empty() {
            return Err(Error::Parse { line: 0, message: "no shots".into() });
        }
        Ok(Self { shots })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_csv(&std::fs::read_to_string(path)?)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,i,q\n");
        for s in &self.shots {
            let _ = writeln!(out, "{},{:e},{:e}", s.label, s.i, s.q);
        }
        out
    }
}

fn parse_row(line: &str) -> Option<Shot> {
    let cols: Vec<&str> = line.split(',').map(str::trim).collect();
    if cols.len() != 3 {
        return None;
    }
    let label = match cols[0] {
        "g" | "0" => Level::G,
        "e" | "1" => Level::E,
        "f" | "2" => Level::F,
        _ => return None,
    };
    let i: f64 = cols[1].parse().ok()?;
    let q: f64 = cols[2].parse().ok()?;
    (i.is_finite() && q.is_finite()).then_some(Shot { label, i, q })
}

/// A two-dimensional Gaussian cluster in the IQ plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianBlob {
    pub label: Level,
    pub mean: [f64; 2],
    /// `[[σ_ii, σ_iq], [σ_iq, σ_qq]]`.
    pub covariance: [[f64; 2]; 2],
    /// Share of the label's shots the Gaussian was fitted to.
    pub weight: f64,
}

impl GaussianBlob {
    pub fn new(label: Level, mean: [f64; 2], covariance: [[f64; 2]; 2]) -> Result<Self> {
        let b = Self { label, mean, covariance, weight: 1.0 };
        b.validate()?;
        Ok(b)
    }

    pub fn isotropic(label: Level, mean: [f64; 2], sigma: f64) -> Result<Self> {
        Self::new(label, mean, [[sigma * sigma, 0.0], [0.0, sigma * sigma]])
    }

    pub fn determinant(&self) -> f64 {
        let c = &self.covariance;
        c[0][0] * c[1][1] - c[0][1] * c[1][0]
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.covariance;
        let scale = c[0][0].abs().max(c[1][1].abs());
        let ok = c[0][0] > 0.0
            && c[1][1] > 0.0
            && (c[0][1] - c[1][0]).abs() <= 1e-12 * scale
            && self.determinant() > 1e-12 * scale * scale
            && self.mean.iter().all(|m| m.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::DegenerateCovariance(format!(
                "blob `{}` covariance {:?} is not positive definite",
                self.label, self.covariance
            )))
        }
    }

    fn precision(&self) -> [[f64; 2]; 2] {
        let c = &self.covariance;
        let det = self.determinant();
        [[c[1][1] / det, -c[0][1] / det], [-c[1][0] / det, c[0][0] / det]]
    }

    /// Lower Cholesky factor of the covariance.
    fn cholesky(&self) -> [[f64; 2]; 2] {
        let c = &self.covariance;
        let l00 = c[0][0].sqrt();
        let l10 = c[1][0] / l00;
        let l11 = (c[1][1] - l10 * l10).max(0.0).sqrt();
        [[l00, 0.0], [l10, l11]]
    }

    pub fn log_likelihood(&self, i: f64, q: f64) -> f64 {
        let p = self.precision();
        let (di, dq) = (i - self.mean[0], q - self.mean[1]);
        let quad = di * (p[0][0] * di + p[0][1] * dq) + dq * (p[1][0] * di + p[1][1] * dq);
        -0.5 * quad - 0.5 * self.determinant().ln() - (2.0 * PI).ln()
    }

    /// Principal semi-axes `(a, b)` at `n_sigma` and the rotation of the
    /// major axis from the I axis, in radians.
    pub fn ellipse(&self, n_sigma: f64) -> (f64, f64, f64) {
        let c = &self.covariance;
        let tr = c[0][0] + c[1][1];
        let disc = ((c[0][0] - c[1][1]).powi(2) / 4.0 + c[0][1] * c[0][1]).sqrt();
        let l1 = tr / 2.0 + disc;
        let l2 = (tr / 2.0 - disc).max(0.0);
        let angle = 0.5 * (2.0 * c[0][1]).atan2(c[0][0] - c[1][1]);
        (n_sigma * l1.sqrt(), n_sigma * l2.sqrt(), angle)
    }
}

/// Mahalanobis radius that delimits a cluster core in [`BlobFit::Core`].
pub const DEFAULT_CORE_RADIUS: f64 = 4.0;

/// How a label's shots are reduced to one Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum BlobFit {
    /// Sample mean and covariance of every shot.
    Moments,
    /// Sample moments of the shots within `radius` Mahalanobis units of the
    /// cluster, iterated to a fixed point and corrected for the truncation.
    /// Shots that relaxed or were thermally excited into another cluster
    /// then count as state error rather than widening the fit.
    Core { radius: f64 },
}

impl Default for BlobFit {
    fn default() -> Self {
        BlobFit::Core { radius: DEFAULT_CORE_RADIUS }
    }
}

fn moments(pts: &[&Shot]) -> ([f64; 2], [[f64; 2]; 2]) {
    let n = pts.len().max(1) as f64;
    let mi = pts.iter().map(|s| s.i).sum::<f64>() / n;
    let mq = pts.iter().map(|s| s.q).sum::<f64>() / n;
    let (mut sii, mut siq, mut sqq) = (0.0, 0.0, 0.0);
    for s in pts {
        let (di, dq) = (s.i - mi, s.q - mq);
        sii += di * di;
        siq += di * dq;
        sqq += dq * dq;
    }
    ([mi, mq], [[sii / n, siq / n], [siq / n, sqq / n]])
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median centre and MAD widths: a start the far tail cannot drag.
fn robust_start(label: Level, pts: &[&Shot]) -> Option<GaussianBlob> {
    let mi = median(pts.iter().map(|s| s.i).collect());
    let mq = median(pts.iter().map(|s| s.q).collect());
    let si = 1.4826 * median(pts.iter().map(|s| (s.i - mi).abs()).collect());
    let sq = 1.4826 * median(pts.iter().map(|s| (s.q - mq).abs()).collect());
    let blob = GaussianBlob {
        label,
        mean: [mi, mq],
        covariance: [[si * si, 0.0], [0.0, sq * sq]],
        weight: 1.0,
    };
    blob.validate().ok().map(|_| blob)
}

fn core_fit(label: Level, pts: &[&Shot], radius: f64) -> Option<GaussianBlob> {
    // per-axis variance of a 2-D Gaussian truncated at Mahalanobis radius R
    let r2 = radius * radius;
    let kept = -(-r2 / 2.0).exp_m1();
    let shrink = (kept - (-r2 / 2.0).exp() * r2 / 2.0) / kept;
    let mut blob = robust_start(label, pts)?;
    let mut inside: Vec<bool> = Vec::new();
    for _ in 0..100 {
        let p = blob.precision();
        let now: Vec<bool> = pts
            .iter()
            .map(|s| {
                let (di, dq) = (s.i - blob.mean[0], s.q - blob.mean[1]);
                di * (p[0][0] * di + p[0][1] * dq) + dq * (p[1][0] * di + p[1][1] * dq) <= r2
            })
            .collect();
        if now == inside {
            break;
        }
        inside = now;
        let core: Vec<&Shot> =
            pts.iter().zip(&inside).filter(|(_, k)| **k).map(|(s, _)| *s).collect();
        if core.len() < 3 {
            return None;
        }
        let (mean, cov) = moments(&core);
        let next = GaussianBlob {
            label,
            mean,
            covariance: cov.map(|row| row.map(|v| v / shrink)),
            weight: core.len() as f64 / pts.len() as f64,
        };
        next.validate().ok()?;
        blob = next;
    }
    Some(blob)
}

/// One Gaussian per prepared state, fitted with [`BlobFit::default`].
pub fn fit_blobs(shots: &IQShotSet) -> Result<Vec<GaussianBlob>> {
    fit_blobs_with(shots, BlobFit::default())
}

pub fn fit_blobs_with(shots: &IQShotSet, method: BlobFit) -> Result<Vec<GaussianBlob>> {
    let labels = shots.labels();
    if labels.is_empty() {
        return Err(Error::Domain("no shots to fit".into()));
    }
    let mut blobs = Vec::with_capacity(labels.len());
    for label in labels {
        let pts: Vec<&Shot> = shots.of(label).collect();
        let (mean, covariance) = moments(&pts);
        let all = GaussianBlob { label, mean, covariance, weight: 1.0 };
        all.validate()?;
        if pts.len() < MIN_SHOTS_PER_LABEL {
            return Err(Error::InsufficientShots {
                label: label.to_string(),
                count: pts.len(),
                required: MIN_SHOTS_PER_LABEL,
            });
        }
        let blob = match method {
            BlobFit::Moments => all,
            BlobFit::Core { radius } => core_fit(label, &pts, radius).ok_or_else(|| {
                Error::DegenerateCovariance(format!("core of cluster `{label}` is degenerate"))
            })?,
        };
        blobs.push(blob);
    }
    Ok(blobs)
}

/// Fractional maximum-likelihood vote: blobs tied at the top share the shot.
fn vote(blobs: &[GaussianBlob], i: f64, q: f64) -> Vec<f64> {
    let ll: Vec<f64> = blobs.iter().map(|b| b.log_likelihood(i, q)).collect();
    shares(&ll)
}

fn shares(ll: &[f64]) -> Vec<f64> {
    let best = ll.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-12 * (1.0 + best.abs());
    let tied = ll.iter().filter(|v| **v >= best - tol).count() as f64;
    ll.iter().map(|v| if *v >= best - tol { 1.0 / tied } else { 0.0 }).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentMatrix {
    pub labels: Vec<Level>,
    /// `probabilities[prepared][assigned]`.
    pub probabilities: Vec<Vec<f64>>,
    pub counts: Vec<usize>,
}

impl AssignmentMatrix {
    pub fn index(&self, label: Level) -> Option<usize> {
        self.labels.iter().position(|l| *l == label)
    }

    /// `P(assigned | prepared)`.
    pub fn get(&self, prepared: Level, assigned: Level) -> Option<f64> {
        Some(self.probabilities[self.index(prepared)?][self.index(assigned)?])
    }

    /// Total assignment error of each prepared state, `1 − P(k | k)`.
    pub fn errors(&self) -> Vec<f64> {
        (0..self.labels.len()).map(|k| 1.0 - self.probabilities[k][k]).collect()
    }
}

/// Classifies every shot by maximum Gaussian likelihood among `blobs`.
pub fn assignment_matrix(shots: &IQShotSet, blobs: &[GaussianBlob]) -> Result<AssignmentMatrix> {
    let labels: Vec<Level> = blobs.iter().map(|b| b.label).collect();
    for l in shots.labels() {
        if !labels.contains(&l) {
            return Err(Error::Domain(format!("no blob for prepared state `{l}`")));
        }
    }
    let n = labels.len();
    let votes: Vec<Vec<f64>> = shots.shots.par_iter().map(|s| vote(blobs, s.i, s.q)).collect();
    // summed in shot order so the result does not depend on scheduling
    let mut totals = vec![0.0; n * n];
    for (s, v) in shots.shots.iter().zip(votes) {
        let row = labels.iter().position(|l| *l == s.label).expect("checked above");
        for (col, w) in v.into_iter().enumerate() {
            totals[row * n + col] += w;
        }
    }
    let counts: Vec<usize> = labels.iter().map(|l| shots.count(*l)).collect();
    let probabilities = (0..n)
        .map(|r| {
            let row = &totals[r * n..(r + 1) * n];
            let sum: f64 = row.iter().sum();
            if sum > 0.0 {
                row.iter().map(|v| v / sum).collect()
            } else {
                vec![0.0; n]
            }
        })
        .collect();
    Ok(AssignmentMatrix { labels, probabilities, counts })
}

fn quadratic_roots(a: f64, b: f64, c: f64, out: &mut Vec<f64>) {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return;
    }
    if a.abs() <= 1e-14 * scale {
        if b.abs() > 1e-14 * scale {
            out.push(-c / b);
        }
        return;
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return;
    }
    let s = disc.sqrt();
    let q = -0.5 * (b + b.signum() * s);
    if q != 0.0 {
        out.push(q / a);
        out.push(c / q);
    } else {
        out.push(0.0);
    }
}

/// Probability that a shot drawn from `density` is assigned to
/// `blobs[target]` by maximum likelihood (ties shared).
///
/// Around the mean of `density`, in whitened polar coordinates, every
/// log-likelihood is quadratic in the radius along a ray, so the decision
/// intervals on each ray are found exactly and their Gaussian mass is
/// `e^{−r₀²/2} − e^{−r₁²/2}`. The angular average uses the trapezoid
/// rule, doubled until it settles to [`OVERLAP_TOLERANCE`].
pub fn region_probability(density: &GaussianBlob, blobs: &[GaussianBlob], target: usize) -> f64 {
    let l = density.cholesky();
    let coeffs: Vec<_> = blobs
        .iter()
        .map(|b| {
            let p = b.precision();
            let d = [density.mean[0] - b.mean[0], density.mean[1] - b.mean[1]];
            let pd = [p[0][0] * d[0] + p[0][1] * d[1], p[1][0] * d[0] + p[1][1] * d[1]];
            let c = -0.5 * (d[0] * pd[0] + d[1] * pd[1]) - 0.5 * b.determinant().ln();
            (p, pd, c)
        })
        .collect();
    let ray = |theta: f64| {
        let u = [theta.cos(), theta.sin()];
        let v = [l[0][0] * u[0], l[1][0] * u[0] + l[1][1] * u[1]];
        let quad: Vec<(f64, f64, f64)> = coeffs
            .iter()
            .map(|(p, pd, c)| {
                let pv = [p[0][0] * v[0] + p[0][1] * v[1], p[1][0] * v[0] + p[1][1] * v[1]];
                (-0.5 * (v[0] * pv[0] + v[1] * pv[1]), -(pd[0] * v[0] + pd[1] * v[1]), *c)
            })
            .collect();
        let mut cuts = vec![0.0];
        for a in 0..quad.len() {
            for b in (a + 1)..quad.len() {
                quadratic_roots(
                    quad[a].0 - quad[b].0,
                    quad[a].1 - quad[b].1,
                    quad[a].2 - quad[b].2,
                    &mut cuts,
                );
            }
        }
        cuts.retain(|r| r.is_finite() && *r >= 0.0);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut mass = 0.0;
        for (k, &lo) in cuts.iter().enumerate() {
            let hi = cuts.get(k + 1).copied().unwrap_or(f64::INFINITY);
            let mid = if hi.is_finite() { 0.5 * (lo + hi) } else { lo + 1.0 + lo };
            let ll: Vec<f64> = quad.iter().map(|(a, b, c)| a * mid * mid + b * mid + c).collect();
            let share = shares(&ll)[target];
            if share > 0.0 {
                let tail_hi = if hi.is_finite() { (-0.5 * hi * hi).exp() } else { 0.0 };
                mass += share * ((-0.5 * lo * lo).exp() - tail_hi);
            }
        }
        mass
    };
    let average =
        |n: usize| (0..n).map(|k| ray(2.0 * PI * k as f64 / n as f64)).sum::<f64>() / n as f64;
    let mut n = 64;
    let mut prev = average(n);
    while n < 1 << 18 {
        n *= 2;
        // reuse the even nodes of the previous level
        let odd = (0..n / 2).map(|k| ray(2.0 * PI * (2 * k + 1) as f64 / n as f64)).sum::<f64>()
            / n as f64;
        let next = 0.5 * prev + odd;
        if (next - prev).abs() < OVERLAP_TOLERANCE {
            return next.clamp(0.0, 1.0);
        }
        prev = next;
    }
    prev.clamp(0.0, 1.0)
}

/// Probability mass of each blob falling in the other's maximum-likelihood
/// decision region.
pub fn separation_error(a: &GaussianBlob, b: &GaussianBlob) -> (f64, f64) {
    let pair = [*a, *b];
    (1.0 - region_probability(a, &pair, 0), 1.0 - region_probability(b, &pair, 1))
}

/// Separation error of every blob against all the others.
pub fn separation_errors(blobs: &[GaussianBlob]) -> Vec<f64> {
    (0..blobs.len())
        .into_par_iter()
        .map(|k| 1.0 - region_probability(&blobs[k], blobs, k))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBreakdown {
    pub labels: Vec<Level>,
    pub epsilon: Vec<f64>,
    pub epsilon_s: Vec<f64>,
    /// `epsilon − epsilon_s`, clipped at zero.
    pub epsilon_t: Vec<f64>,
}

impl ErrorBreakdown {
    pub fn new(labels: Vec<Level>, epsilon: Vec<f64>, epsilon_s: Vec<f64>) -> Self {
        let epsilon_t = labels
            .iter()
            .zip(epsilon.iter().zip(&epsilon_s))
            .map(|(l, (e, s))| {
                let t = e - s;
                if t < 0.0 {
                    log::warn!("state error of `{l}` is negative ({t:.3e}); clipped to 0");
                }
                t.max(0.0)
            })
            .collect();
        Self { labels, epsilon, epsilon_s, epsilon_t }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadoutReport {
    pub blobs: Vec<GaussianBlob>,
    pub assignment: AssignmentMatrix,
    pub breakdown: ErrorBreakdown,
}

/// Blob fit, assignment matrix and error breakdown in one pass.
pub fn analyze(shots: &IQShotSet) -> Result<ReadoutReport> {
    analyze_with(shots, BlobFit::default())
}

pub fn analyze_with(shots: &IQShotSet, method: BlobFit) -> Result<ReadoutReport> {
    let blobs = fit_blobs_with(shots, method)?;
    let assignment = assignment_matrix(shots, &blobs)?;
    let breakdown = ErrorBreakdown::new(
        assignment.labels.clone(),
        assignment.errors(),
        separation_errors(&blobs),
    );
    Ok(ReadoutReport { blobs, assignment, breakdown })
}

/// Probability of an excited qubit decaying during a measurement of
/// length `tau_m`: `1 − e^{−τ_m/T1}`.
pub fn t1_error_bound(t1: f64, tau_m: f64) -> Result<f64> {
    if !(t1 > 0.0) || !(tau_m >= 0.0) {
        return Err(Error::Domain(format!(
            "need t1 > 0 and tau_m >= 0, got t1 = {t1}, tau_m = {tau_m}"
        )));
    }
    Ok(-(-tau_m / t1).exp_m1())
}

/// Temperature at which a Boltzmann distribution gives `p_e/p_g` for a
/// transition at `f_eg` Hz.
pub fn effective_temperature(p_e: f64, p_g: f64, f_eg: f64) -> Result<f64> {
    if !(f_eg > 0.0) || !(p_e >= 0.0) || !(p_g > 0.0) {
        return Err(Error::Domain(format!(
            "need p_e >= 0, p_g > 0 and f_eg > 0, got {p_e}, {p_g}, {f_eg}"
        )));
    }
    if p_e >= p_g {
        return Err(Error::Domain(format!(
            "p_e = {p_e} >= p_g = {p_g}: population inversion has no positive temperature"
        )));
    }
    if p_e == 0.0 {
        return Ok(0.0);
    }
    Ok(PLANCK * f_eg / (BOLTZMANN * (p_g / p_e).ln()))
}

/// Scatter plot of (at most `max_points_per_label`) shots with the 3σ
/// ellipse of every blob.
pub fn scatter_svg(
    shots: &IQShotSet,
    blobs: &[GaussianBlob],
    max_points_per_label: usize,
) -> String {
    const SIZE: f64 = 480.0;
    const PAD: f64 = 20.0;
    let colour = |l: Level| match l {
        Level::G => "#1f77b4",
        Level::E => "#d62728",
        Level::F => "#2ca02c",
    };
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    let mut extend = |x: f64, y: f64| {
        lo = [lo[0].min(x), lo[1].min(y)];
        hi = [hi[0].max(x), hi[1].max(y)];
    };
    for s in &shots.shots {
        extend(s.i, s.q);
    }
    for b in blobs {
        let (a, _, _) = b.ellipse(3.0);
        extend(b.mean[0] - a, b.mean[1] - a);
        extend(b.mean[0] + a, b.mean[1] + a);
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(f64::MIN_POSITIVE);
    let scale = (SIZE - 2.0 * PAD) / span;
    let x = |i: f64| PAD + (i - lo[0]) * scale;
    let y = |q: f64| SIZE - PAD - (q - lo[1]) * scale;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for label in shots.labels() {
        let n = shots.count(label);
        let stride = n.div_ceil(max_points_per_label.max(1)).max(1);
        let _ = writeln!(out, r#"<g fill="{}" fill-opacity="0.4">"#, colour(label));
        for s in shots.of(label).step_by(stride) {
            let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="1"/>"#, x(s.i), y(s.q));
        }
        let _ = writeln!(out, "</g>");
    }
    for b in blobs {
        let (a, c, angle) = b.ellipse(3.0);
        let _ = writeln!(
            out,
            r#"<ellipse cx="{:.2}" cy="{:.2}" rx="{:.2}" ry="{:.2}" transform="rotate({:.3} {:.2} {:.2})" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            x(b.mean[0]),
            y(b.mean[1]),
            a * scale,
            c * scale,
            -angle.to_degrees(),
            x(b.mean[0]),
            y(b.mean[1]),
            colour(b.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;
    use statrs::distribution::{ContinuousCDF, Normal};

    fn q_tail(x: f64) -> f64 {
        1.0 - Normal::new(0.0, 1.0).unwrap().cdf(x)
    }

    fn iso(label: Level, i: f64, q: f64, sigma: f64) -> GaussianBlob {
        GaussianBlob::isotropic(label, [i, q], sigma).unwrap()
    }

    #[test]
    fn identical_blobs_split_evenly() {
        let a = iso(Level::G, 0.3, -0.2, 1.1);
        let b = GaussianBlob { label: Level::E, ..a };
        let (ea, eb) = separation_error(&a, &b);
        assert!((ea - 0.5).abs() < 1e-12 && (eb - 0.5).abs() < 1e-12);
    }

    #[test]
    fn equal_isotropic_matches_tail_function() {
        let a = iso(Level::G, 0.0, 0.0, 1.0);
        let b = iso(Level::E, 3.0, 0.0, 1.0);
        let (ea, eb) = separation_error(&a, &b);
        assert!((ea - q_tail(1.5)).abs() < 1e-5, "{ea}");
        assert!((eb - q_tail(1.5)).abs() < 1e-5);
    }

    #[test]
    fn far_apart_blobs_do_not_overlap() {
        let a = iso(Level::G, 0.0, 0.0, 0.5);
        let b = iso(Level::E, 0.0, 5.0, 0.5);
        let (ea, eb) = separation_error(&a, &b);
        assert!(ea < 1e-6 && eb < 1e-6);
    }

    #[test]
    fn unequal_widths_agree_with_sampling() {
        let a = iso(Level::G, 0.0, 0.0, 1.0);
        let b = GaussianBlob::new(Level::E, [2.5, 0.5], [[2.0, 0.4], [0.4, 1.5]]).unwrap();
        let (ea, _) = separation_error(&a, &b);
        let shots = synth::blob_shots(&a, 200_000, 3);
        let wrong = shots
            .iter()
            .filter(|s| b.log_likelihood(s.i, s.q) > a.log_likelihood(s.i, s.q))
            .count() as f64
            / 200_000.0;
        let sigma = (ea * (1.0 - ea) / 200_000.0).sqrt();
        assert!((wrong - ea).abs() < 4.0 * sigma, "{wrong} vs {ea}");
    }

    #[test]
    fn fit_recovers_generator() {
        let truth = GaussianBlob::new(Level::G, [1.0, -2.0], [[0.5, 0.1], [0.1, 0.3]]).unwrap();
        let n = 30_000;
        let set = IQShotSet::new(synth::blob_shots(&truth, n, 11));
        let blob = fit_blobs(&set).unwrap()[0];
        for k in 0..2 {
            let sd = truth.covariance[k][k].sqrt();
            assert!((blob.mean[k] - truth.mean[k]).abs() < 3.0 * sd / (n as f64).sqrt());
            assert!((blob.covariance[k][k] / truth.covariance[k][k] - 1.0).abs() < 0.05);
        }
        assert!((blob.covariance[0][1] - truth.covariance[0][1]).abs() < 0.05 * 0.1 + 0.01);
    }

    #[test]
    fn degenerate_and_short_labels() {
        let one = IQShotSet::new(vec![Shot { label: Level::G, i: 1.0, q: 1.0 }]);
        assert!(matches!(fit_blobs(&one), Err(Error::DegenerateCovariance(_))));
        let a = iso(Level::E, 0.0, 0.0, 1.0);
        let few = IQShotSet::new(synth::blob_shots(&a, 50, 1));
        assert!(matches!(fit_blobs(&few), Err(Error::InsufficientShots { count: 50, .. })));
    }

    #[test]
    fn separated_blobs_give_identity() {
        let g = iso(Level::G, 0.0, 0.0, 0.1);
        let e = iso(Level::E, 10.0, 0.0, 0.1);
        let mut shots = synth::blob_shots(&g, 1000, 1);
        shots.extend(synth::blob_shots(&e, 1000, 2));
        let set = IQShotSet::new(shots);
        let m = assignment_matrix(&set, &fit_blobs(&set).unwrap()).unwrap();
        assert_eq!(m.probabilities, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    }

    #[test]
    fn single_label_is_trivially_assigned() {
        let g = iso(Level::G, 0.0, 0.0, 1.0);
        let set = IQShotSet::new(synth::blob_shots(&g, 500, 4));
        let m = assignment_matrix(&set, &fit_blobs(&set).unwrap()).unwrap();
        assert_eq!(m.probabilities, vec![vec![1.0]]);
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let g = iso(Level::G, 0.0, 0.0, 1.0);
        let set = IQShotSet::new(synth::blob_shots(&g, 10, 4));
        let back = IQShotSet::from_csv(&set.to_csv()).unwrap();
        assert_eq!(set, back);
        let err = IQShotSet::from_csv("label,i,q\ng,1,2\nx,1,2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn breakdown_clips_negative_state_error() {
        let b =
            ErrorBreakdown::new(vec![Level::G, Level::E], vec![0.01, 0.001], vec![0.004, 0.002]);
        assert!((b.epsilon_t[0] - 0.006).abs() < 1e-15);
        assert_eq!(b.epsilon_t[1], 0.0);
    }

    #[test]
    fn t1_bound() {
        assert_eq!(t1_error_bound(50e-6, 0.0).unwrap(), 0.0);
        let v = t1_error_bound(50e-6, 2e-6).unwrap();
        assert!((v - 0.039211).abs() < 1e-6, "{v}");
        assert!(v <= 2e-6 / 50e-6);
        assert!(t1_error_bound(0.0, 1e-6).is_err());
    }

    #[test]
    fn temperature() {
        let t = effective_temperature(0.007, 0.993, 4.5e9).unwrap();
        assert!((t - 0.04359).abs() < 1e-4, "{t}");
        let t2 = effective_temperature(0.007, 0.993, 9.0e9).unwrap();
        assert!((t2 / t - 2.0).abs() < 1e-12);
        assert!(effective_temperature(1e-300, 1.0, 4.5e9).unwrap() < 1e-3);
        assert!(effective_temperature(0.6, 0.4, 4.5e9).is_err());
    }

    #[test]
    fn svg_has_one_ellipse_per_blob() {
        let g = iso(Level::G, 0.0, 0.0, 1.0);
        let e = iso(Level::E, 4.0, 0.0, 1.0);
        let mut shots = synth::blob_shots(&g, 200, 1);
        shots.extend(synth::blob_shots(&e, 200, 2));
        let set = IQShotSet::new(shots);
        let svg = scatter_svg(&set, &fit_blobs(&set).unwrap(), 100);
        assert_eq!(svg.matches("<ellipse").count(), 2);
        assert_eq!(svg.matches("<circle").count(), 200);
    }
}
