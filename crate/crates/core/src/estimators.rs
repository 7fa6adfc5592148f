//! Metered zeroth-order gradient estimators.
//!
//! All estimators use forward differences. `dir_*` estimators follow a
//! Gaussian direction `u` and return `((f(x + v u) − f(x)) / v) · u`;
//! [`coord_fd_gradient`] walks the coordinate axes instead.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{offset, DenseVector};
use crate::objective::{CompositeProblem, SzoCounter};

pub const DEFAULT_SMOOTHING: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothingConfig {
    /// Smoothing constant `v`.
    pub v: f64,
    /// Directions averaged per stochastic estimate.
    pub batch_dirs: usize,
    /// Components averaged per stochastic estimate.
    pub batch_samples: usize,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        SmoothingConfig {
            v: DEFAULT_SMOOTHING,
            batch_dirs: 1,
            batch_samples: 1,
        }
    }
}

impl SmoothingConfig {
    pub fn with_v(v: f64) -> Self {
        SmoothingConfig {
            v,
            ..SmoothingConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_smoothing(self.v)?;
        if self.batch_dirs == 0 || self.batch_samples == 0 {
            return Err(Error::InvalidBatch(format!(
                "batch sizes must be >= 1 (dirs = {}, samples = {})",
                self.batch_dirs, self.batch_samples
            )));
        }
        Ok(())
    }
}

pub(crate) fn check_smoothing(v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::InvalidSmoothing(v));
    }
    Ok(())
}

/// `(f_i(x + v u) − f_i(x)) / v`. Two oracle calls.
pub fn directional_difference<P: CompositeProblem + ?Sized>(
    problem: &P,
    i: usize,
    x: &[f64],
    u: &[f64],
    v: f64,
    counter: &SzoCounter,
) -> Result<f64> {
    check_smoothing(v)?;
    problem.check_dim(u)?;
    let shifted = offset(x, v, u);
    let f1 = problem.eval_component(i, &shifted, counter)?;
    let f0 = problem.eval_component(i, x, counter)?;
    Ok((f1 - f0) / v)
}

/// `(1/n) Σ_i (f_i(x + v u) − f_i(x)) / v`. `2n` oracle calls.
pub fn full_directional_difference<P: CompositeProblem + ?Sized>(
    problem: &P,
    x: &[f64],
    u: &[f64],
    v: f64,
    counter: &SzoCounter,
) -> Result<f64> {
    check_smoothing(v)?;
    problem.check_dim(u)?;
    let shifted = offset(x, v, u);
    let f1 = problem.eval_all_components(&shifted, counter)?;
    let f0 = problem.eval_all_components(x, counter)?;
    let sum: f64 = f1.iter().zip(&f0).map(|(a, b)| a - b).sum();
    Ok(sum / (f0.len() as f64 * v))
}

/// Single-component Gaussian-smoothing estimate of `∇f_i(x)`.
pub fn dir_estimate_component<P: CompositeProblem + ?Sized>(
    problem: &P,
    i: usize,
    x: &[f64],
    u: &[f64],
    v: f64,
    counter: &SzoCounter,
) -> Result<DenseVector> {
    let s = directional_difference(problem, i, x, u, v, counter)?;
    Ok(DenseVector::from_raw(u.iter().map(|uj| s * uj).collect()))
}

/// Full-sum Gaussian-smoothing estimate of `∇f(x)`.
pub fn dir_estimate_full<P: CompositeProblem + ?Sized>(
    problem: &P,
    x: &[f64],
    u: &[f64],
    v: f64,
    counter: &SzoCounter,
) -> Result<DenseVector> {
    let s = full_directional_difference(problem, x, u, v, counter)?;
    Ok(DenseVector::from_raw(u.iter().map(|uj| s * uj).collect()))
}

/// Forward-difference gradient along every coordinate axis.
///
/// `f_i(x)` is evaluated once per component and reused across coordinates,
/// so the cost is exactly `n (d + 1)` oracle calls.
pub fn coord_fd_gradient<P: CompositeProblem + ?Sized>(
    problem: &P,
    x: &[f64],
    v: f64,
    counter: &SzoCounter,
) -> Result<DenseVector> {
    check_smoothing(v)?;
    let base = problem.eval_all_components(x, counter)?;
    let n = base.len() as f64;
    let mut probe = x.to_vec();
    let mut grad = vec![0.0; x.len()];
    for l in 0..x.len() {
        probe[l] = x[l] + v;
        let shifted = problem.eval_all_components(&probe, counter)?;
        probe[l] = x[l];
        let sum: f64 = shifted.iter().zip(&base).map(|(a, b)| a - b).sum();
        grad[l] = sum / (n * v);
    }
    Ok(DenseVector::from_raw(grad))
}

/// Average of [`dir_estimate_component`] over every `(i, u)` pair.
/// `2 |samples| |dirs|` oracle calls.
pub fn batched_dir_estimate<P: CompositeProblem + ?Sized, U: AsRef<[f64]>>(
    problem: &P,
    samples: &[usize],
    x: &[f64],
    dirs: &[U],
    v: f64,
    counter: &SzoCounter,
) -> Result<DenseVector> {
    if samples.is_empty() || dirs.is_empty() {
        return Err(Error::InvalidBatch(format!(
            "need nonempty sample and direction sets (got {} samples, {} directions)",
            samples.len(),
            dirs.len()
        )));
    }
    problem.check_dim(x)?;
    let mut acc = vec![0.0; x.len()];
    for u in dirs {
        let u = u.as_ref();
        let mut s = 0.0;
        for &i in samples {
            s += directional_difference(problem, i, x, u, v, counter)?;
        }
        crate::linalg::axpy(s, u, &mut acc);
    }
    let inv = 1.0 / (samples.len() * dirs.len()) as f64;
    acc.iter_mut().for_each(|a| *a *= inv);
    Ok(DenseVector::from_raw(acc))
}
