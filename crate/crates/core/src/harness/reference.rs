//! High-accuracy reference optimum from exact gradients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseVector;
use crate::objective::{prox_in_place, CompositeProblem};

pub const DEFAULT_REFERENCE_TOL: f64 = 1e-10;
const MAX_ITERATIONS: usize = 500_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceOptimum {
    pub x_star: DenseVector,
    pub f_star: f64,
    /// Gradient-mapping tolerance the solve was run to.
    pub tol: f64,
    pub iterations: usize,
}

impl ReferenceOptimum {
    /// A known optimum, e.g. from a closed form.
    pub fn known(problem: &dyn CompositeProblem, x_star: DenseVector) -> Result<Self> {
        let f_star = problem.full_objective(&x_star)?;
        Ok(ReferenceOptimum {
            x_star,
            f_star,
            tol: 0.0,
            iterations: 0,
        })
    }
}

/// `‖prox(x − η∇f(x), η) − x‖` with exact gradients.
pub fn fixed_point_residual(problem: &dyn CompositeProblem, x: &[f64], eta: f64) -> Result<f64> {
    let g = problem.full_gradient(x)?;
    let mut y = x.to_vec();
    crate::linalg::axpy(-eta, &g, &mut y);
    let y = problem.prox_step(&y, eta)?;
    Ok(y.dist_sq(x).sqrt())
}

/// Accelerated proximal gradient with step `1/L` and gradient-based restarts,
/// run until the gradient mapping `‖prox(y − η∇f(y)) − y‖ / η` drops to `tol`.
pub fn compute_reference_optimum(
    problem: &dyn CompositeProblem,
    tol: f64,
) -> Result<ReferenceOptimum> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "reference tolerance must be > 0, got {tol}"
        )));
    }
    if !problem.has_analytic_gradient() {
        return Err(Error::UnavailableGradient);
    }
    let eta = 1.0 / problem.smoothness();
    let d = problem.dim();
    let mut x = vec![0.0; d];
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut best = f64::INFINITY;
    for it in 0..MAX_ITERATIONS {
        let g = problem.full_gradient(&y)?;
        let mut next = y.clone();
        crate::linalg::axpy(-eta, &g, &mut next);
        prox_in_place(problem, &mut next, eta);
        let mapping = next
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
            / eta;
        if !mapping.is_finite() {
            return Err(Error::ReferenceFailure(format!(
                "non-finite iterate at {it}"
            )));
        }
        best = best.min(mapping);
        if mapping <= tol {
            let x_star = DenseVector::new(y)?;
            let f_star = problem.full_objective(&x_star)?;
            return Ok(ReferenceOptimum {
                x_star,
                f_star,
                tol,
                iterations: it,
            });
        }
        // restart momentum when it points uphill
        let uphill: f64 = y
            .iter()
            .zip(&next)
            .zip(&x)
            .map(|((yv, nv), xv)| (yv - nv) * (nv - xv))
            .sum();
        if uphill > 0.0 {
            t = 1.0;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        for j in 0..d {
            y[j] = next[j] + beta * (next[j] - x[j]);
        }
        x = next;
        t = t_next;
    }
    Err(Error::ReferenceFailure(format!(
        "gradient mapping {best:e} above tolerance {tol:e} after {MAX_ITERATIONS} iterations"
    )))
}
