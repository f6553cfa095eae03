//! Damped Gauss–Newton (Levenberg–Marquardt) least squares.
//!
//! Parameters should be scaled by the caller so that they are of order
//! one; finite-difference steps and the step-size criterion assume it.

use serde::{Deserialize, Serialize};

use crate::linalg::{invert_real, solve_real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Stop when `‖δ‖ < xtol·(‖p‖ + xtol)`.
    pub xtol: f64,
    /// Stop when the RMS residual changes by less than this over an
    /// accepted iteration.
    pub ftol: f64,
    pub initial_lambda: f64,
    /// Relative finite-difference step.
    pub fd_step: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iterations: 500, xtol: 1e-8, ftol: 1e-10, initial_lambda: 1e-3, fd_step: 1e-7 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmResult {
    pub params: Vec<f64>,
    pub residual_rms: f64,
    /// Standard errors from `s²·(JᵀJ)⁻¹`; `NaN` when the normal matrix is singular.
    pub std_errors: Vec<f64>,
    /// Row-major `s²·(JᵀJ)⁻¹`, empty when the normal matrix is singular.
    pub covariance: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// RMS residual after every accepted step, starting with the initial point.
    pub history: Vec<f64>,
}

fn rms(r: &[f64]) -> f64 {
    if r.is_empty() {
        0.0
    } else {
        (r.iter().map(|x| x * x).sum::<f64>() / r.len() as f64).sqrt()
    }
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

/// Central-difference Jacobian, row-major `m × n`.
fn jacobian<F>(f: &F, p: &[f64], r0_len: usize, step: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = p.len();
    let mut jac = vec![0.0; r0_len * n];
    let mut q = p.to_vec();
    for k in 0..n {
        let h = step * p[k].abs().max(1.0);
        q[k] = p[k] + h;
        let up = f(&q);
        q[k] = p[k] - h;
        let down = f(&q);
        q[k] = p[k];
        for i in 0..r0_len {
            jac[i * n + k] = (up[i] - down[i]) / (2.0 * h);
        }
    }
    jac
}

fn normal_equations(jac: &[f64], r: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let m = r.len();
    let mut a = vec![0.0; n * n];
    let mut g = vec![0.0; n];
    for i in 0..m {
        let row = &jac[i * n..(i + 1) * n];
        for j in 0..n {
            g[j] += row[j] * r[i];
            for k in j..n {
                a[j * n + k] += row[j] * row[k];
            }
        }
    }
    for j in 0..n {
        for k in 0..j {
            a[j * n + k] = a[k * n + j];
        }
    }
    (a, g)
}

/// Minimises `Σ rᵢ(p)²` starting at `p0`. Residuals that come back
/// non-finite count as an infinitely bad step.
pub fn levenberg_marquardt<F>(residuals: F, p0: &[f64], opts: &LmOptions) -> LmResult
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = p0.len();
    let mut p = p0.to_vec();
    let mut r = residuals(&p);
    let m = r.len();
    let mut cost = sum_sq(&r);
    let mut history = vec![rms(&r)];
    let mut lambda = opts.initial_lambda;
    let mut converged = false;
    let mut iterations = 0;
    let mut jac = jacobian(&residuals, &p, m, opts.fd_step);

    while iterations < opts.max_iterations && cost.is_finite() {
        iterations += 1;
        let (a, g) = normal_equations(&jac, &r, n);
        let mut accepted = None;
        while lambda < 1e16 {
            let mut damped = a.clone();
            for j in 0..n {
                damped[j * n + j] += lambda * a[j * n + j].max(1e-12);
            }
            let rhs: Vec<f64> = g.iter().map(|x| -x).collect();
            if let Some(delta) = solve_real(&damped, &rhs) {
                let trial: Vec<f64> = p.iter().zip(&delta).map(|(a, b)| a + b).collect();
                let r_trial = residuals(&trial);
                let c_trial = sum_sq(&r_trial);
                if c_trial.is_finite() && c_trial <= cost {
                    accepted = Some((trial, r_trial, c_trial, delta));
                    break;
                }
            }
            lambda *= 4.0;
        }
        let Some((trial, r_trial, c_trial, delta)) = accepted else {
            // no downhill step at any damping: a stationary point
            converged = true;
            break;
        };
        lambda = (lambda / 3.0).max(1e-12);
        let step = delta.iter().map(|x| x * x).sum::<f64>().sqrt();
        let size = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        let rms_old = rms(&r);
        p = trial;
        r = r_trial;
        cost = c_trial;
        history.push(rms(&r));
        jac = jacobian(&residuals, &p, m, opts.fd_step);
        if step < opts.xtol * (size + opts.xtol) || (rms_old - rms(&r)).abs() < opts.ftol {
            converged = true;
            break;
        }
    }

    let (a, _) = normal_equations(&jac, &r, n);
    let dof = m.saturating_sub(n).max(1) as f64;
    let s2 = cost / dof;
    let covariance: Vec<f64> = invert_real(&a, n)
        .filter(|inv| inv.iter().all(|x| x.is_finite()))
        .map(|inv| inv.into_iter().map(|x| x * s2).collect())
        .unwrap_or_default();
    let std_errors = if covariance.is_empty() {
        vec![f64::NAN; n]
    } else {
        (0..n).map(|j| covariance[j * n + j].max(0.0).sqrt()).collect()
    };
    LmResult {
        params: p,
        residual_rms: rms(&r),
        std_errors,
        covariance,
        iterations,
        converged,
        history,
    }
}
