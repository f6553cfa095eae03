//! Seeded synthetic data: spectra, reset curves and IQ shots.
//!
//! Every generator takes an explicit `u64` seed and uses ChaCha8, so the
//! same seed reproduces the same data on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::readout::{region_probability, GaussianBlob, Shot};
use crate::reset::{residual_curve, Level, ResetParams};
use crate::spectrum::{s21_db_with_background, Resonator, S21ModelParams, SpectrumData};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Fundamental mode of the reference device: 3.567 GHz, 5.4 MHz wide.
pub fn mode_a_params() -> S21ModelParams {
    S21ModelParams::bare(3.567e9, 5.4e6)
}

/// Second-order mode of the reference device (6.583 GHz, 20.2 MHz) loaded
/// by six readout resonators spread across the ±10 κ window.
pub fn mode_b_params() -> S21ModelParams {
    let omega_f = 6.583e9;
    let kappa_f = 20.2e6;
    let placements =
        [(-7.5, 5.0e6), (-4.5, 4.0e6), (-2.0, 3.0e6), (2.5, 3.5e6), (5.0, 4.5e6), (8.0, 5.5e6)];
    S21ModelParams {
        omega_f,
        kappa_f,
        resonators: placements
            .iter()
            .map(|&(offset, g)| Resonator {
                omega_r: omega_f + offset * kappa_f,
                g_fr: g,
                gamma_r: 0.2e6,
            })
            .collect(),
        background_k: 0.0,
        background_b: 0.0,
    }
}

/// Uniform grid over `omega_f ± half_widths·kappa_f`.
pub fn window_grid(p: &S21ModelParams, half_widths: f64, points: usize) -> Vec<f64> {
    let lo = p.omega_f - half_widths * p.kappa_f;
    let hi = p.omega_f + half_widths * p.kappa_f;
    (0..points).map(|k| lo + (hi - lo) * k as f64 / (points.max(2) - 1) as f64).collect()
}

/// Model spectrum in dB plus white Gaussian noise of `sigma_db`.
pub fn spectrum(p: &S21ModelParams, frequencies: &[f64], sigma_db: f64, seed: u64) -> SpectrumData {
    let mut r = rng(seed);
    let noise = Normal::new(0.0, sigma_db.max(0.0)).expect("finite sigma");
    let s21_db =
        frequencies.iter().map(|&f| s21_db_with_background(p, f) + noise.sample(&mut r)).collect();
    SpectrumData { frequencies: frequencies.to_vec(), s21_db }
}

/// Reset curve sampled at `times` with additive Gaussian noise of `sigma`,
/// clipped to `[0, 1]`.
pub fn reset_curve(p: &ResetParams, times: &[f64], sigma: f64, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    let noise = Normal::new(0.0, sigma.max(0.0)).expect("finite sigma");
    residual_curve(p, times)
        .into_iter()
        .map(|v| (v + noise.sample(&mut r)).clamp(0.0, 1.0))
        .collect()
}

/// Uniform time grid `0, dt, …, (points − 1)·dt`.
pub fn time_grid(dt: f64, points: usize) -> Vec<f64> {
    (0..points).map(|k| k as f64 * dt).collect()
}

/// `n` shots drawn from `blob`, labelled with the blob's label.
pub fn blob_shots(blob: &GaussianBlob, n: usize, seed: u64) -> Vec<Shot> {
    let mut r = rng(seed);
    draw(blob, blob.label, n, &mut r)
}

fn draw(blob: &GaussianBlob, label: Level, n: usize, r: &mut ChaCha8Rng) -> Vec<Shot> {
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let c = &blob.covariance;
    let l00 = c[0][0].sqrt();
    let l10 = c[1][0] / l00;
    let l11 = (c[1][1] - l10 * l10).max(0.0).sqrt();
    (0..n)
        .map(|_| {
            let (a, b) = (unit.sample(r), unit.sample(r));
            Shot { label, i: blob.mean[0] + l00 * a, q: blob.mean[1] + l10 * a + l11 * b }
        })
        .collect()
}

/// Readout with state errors: a shot prepared in `blobs[k]` lands in
/// `blobs[j]` with probability `found[k][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutGenerator {
    pub blobs: Vec<GaussianBlob>,
    pub found: Vec<Vec<f64>>,
}

impl ReadoutGenerator {
    /// Two-state geometry whose blob cores overlap by 0.38 % (`|g⟩`) and
    /// 0.08 % (`|e⟩`), with 0.7 % thermal `|e⟩` population and 8.78 %
    /// relaxation during readout, giving assignment errors of 1.08 % and
    /// 8.82 %.
    pub fn reference() -> Self {
        let g = GaussianBlob::isotropic(Level::G, [0.0, 0.0], 1.0).expect("valid");
        let e = GaussianBlob::isotropic(Level::E, [3.13, 0.0], 0.22).expect("valid");
        Self { blobs: vec![g, e], found: vec![vec![0.993, 0.007], vec![0.0878, 0.9122]] }
    }

    /// Shots for every prepared state, `n_per_label` each.
    pub fn shots(&self, n_per_label: usize, seed: u64) -> Vec<Shot> {
        let mut r = rng(seed);
        let mut out = Vec::with_capacity(n_per_label * self.blobs.len());
        for (k, blob) in self.blobs.iter().enumerate() {
            let mut counts = vec![0usize; self.blobs.len()];
            for _ in 0..n_per_label {
                let u: f64 = r.random();
                let mut acc = 0.0;
                let mut pick = self.blobs.len() - 1;
                for (j, w) in self.found[k].iter().enumerate() {
                    acc += w;
                    if u < acc {
                        pick = j;
                        break;
                    }
                }
                counts[pick] += 1;
            }
            for (j, &n) in counts.iter().enumerate() {
                out.extend(draw(&self.blobs[j], blob.label, n, &mut r));
            }
        }
        out
    }

    /// Expected assignment error of each prepared state when shots are
    /// classified by maximum likelihood against the generator's own blobs.
    pub fn expected_errors(&self) -> Vec<f64> {
        (0..self.blobs.len())
            .map(|k| {
                let correct: f64 = self
                    .blobs
                    .iter()
                    .enumerate()
                    .map(|(j, b)| self.found[k][j] * region_probability(b, &self.blobs, k))
                    .sum();
                1.0 - correct
            })
            .collect()
    }

    /// Separation error of each blob core against the others.
    pub fn core_separation_errors(&self) -> Vec<f64> {
        crate::readout::separation_errors(&self.blobs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_data() {
        let p = mode_a_params();
        let f = window_grid(&p, 10.0, 101);
        assert_eq!(spectrum(&p, &f, 0.1, 7), spectrum(&p, &f, 0.1, 7));
        assert_ne!(spectrum(&p, &f, 0.1, 7), spectrum(&p, &f, 0.1, 8));
    }

    #[test]
    fn mode_b_dips_sit_inside_window() {
        let p = mode_b_params();
        let f = window_grid(&p, 10.0, 11);
        for r in &p.resonators {
            assert!(r.omega_r > f[0] && r.omega_r < f[10]);
        }
    }

    #[test]
    fn reset_curve_is_clipped_and_seeded() {
        let p = ResetParams::reference_eg();
        let t = time_grid(1e-9, 300);
        let a = reset_curve(&p, &t, 0.005, 1);
        assert_eq!(a, reset_curve(&p, &t, 0.005, 1));
        assert!(a.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn reference_readout_generator() {
        let g = ReadoutGenerator::reference();
        let sep = g.core_separation_errors();
        assert!((sep[0] - 0.0038).abs() < 5e-5, "{sep:?}");
        assert!((sep[1] - 0.0008).abs() < 5e-5, "{sep:?}");
        let eps = g.expected_errors();
        assert!((eps[0] - 0.0108).abs() < 1e-4, "{eps:?}");
        assert!((eps[1] - 0.0882).abs() < 1e-4, "{eps:?}");
        let shots = g.shots(1000, 5);
        assert_eq!(shots.len(), 2000);
        assert_eq!(shots.iter().filter(|s| s.label == Level::G).count(), 1000);
    }
}
