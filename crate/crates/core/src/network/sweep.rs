use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// Frequency grid `start..=stop` with `points` samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencySweep {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl FrequencySweep {
    pub fn new(start: f64, stop: f64, points: usize, spacing: Spacing) -> Result<Self> {
        let s = Self { start, stop, points, spacing };
        s.validate()?;
        Ok(s)
    }

    pub fn linear(start: f64, stop: f64, points: usize) -> Result<Self> {
        Self::new(start, stop, points, Spacing::Linear)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start > 0.0 && self.start.is_finite() && self.stop.is_finite()) {
            return Err(Error::Domain(format!(
                "sweep start must be a positive frequency, got {}",
                self.start
            )));
        }
        if self.stop < self.start {
            return Err(Error::Domain(format!(
                "sweep stop {} is below start {}",
                self.stop, self.start
            )));
        }
        if self.points == 0 {
            return Err(Error::Domain("sweep needs at least one point".into()));
        }
        Ok(())
    }

    pub fn frequencies(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|k| {
                let t = k as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.start + (self.stop - self.start) * t,
                    Spacing::Log => self.start * (self.stop / self.start).powf(t),
                }
            })
            .collect()
    }
}

/// Evaluates `eval` at every frequency in parallel, returning results in
/// input order.
pub fn sweep<T, F>(freqs: &[f64], eval: F) -> Vec<T>
where
    T: Send,
    F: Fn(f64) -> T + Sync,
{
    freqs.par_iter().map(|&f| eval(f)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_and_log_grids() {
        let s = FrequencySweep::linear(1e9, 2e9, 5).unwrap();
        assert_eq!(s.frequencies(), vec![1e9, 1.25e9, 1.5e9, 1.75e9, 2e9]);
        let l = FrequencySweep::new(1e6, 1e9, 4, Spacing::Log).unwrap();
        let f = l.frequencies();
        for (got, want) in f.iter().zip([1e6, 1e7, 1e8, 1e9]) {
            assert!((got / want - 1.0).abs() < 1e-12);
        }
        assert_eq!(FrequencySweep::linear(3e9, 7e9, 1).unwrap().frequencies(), vec![3e9]);
    }

    #[test]
    fn bad_grids_rejected() {
        assert!(FrequencySweep::linear(7e9, 3e9, 10).is_err());
        assert!(FrequencySweep::linear(0.0, 3e9, 10).is_err());
        assert!(FrequencySweep::linear(1e9, 3e9, 0).is_err());
    }

    #[test]
    fn parallel_sweep_keeps_order() {
        let f: Vec<f64> = (0..1000).map(|k| k as f64).collect();
        assert_eq!(sweep(&f, |x| x * 2.0), f.iter().map(|x| x * 2.0).collect::<Vec<_>>());
    }
}
