//! Composite objectives `F(x) = (1/n) Σ f_i(x) + λ1‖x‖₁` with metered
//! component evaluations.

mod linear;
mod logistic;
mod quadratic;

use std::sync::atomic::{AtomicU64, Ordering};

pub use linear::LinearProblem;
pub use logistic::LogisticProblem;
pub use quadratic::QuadraticLassoProblem;

use crate::error::{Error, Result};
use crate::linalg::{soft_threshold_in_place, DenseVector};
use crate::par::Exec;

/// Full passes over at least this many components use the default parallel policy.
pub const PARALLEL_PASS_MIN: usize = 2048;

/// Number of single-component function evaluations made so far.
#[derive(Debug, Default)]
pub struct SzoCounter {
    count: AtomicU64,
}

impl SzoCounter {
    pub fn new() -> Self {
        SzoCounter::default()
    }

    pub fn count(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }

    pub(crate) fn add(&self, k: u64) {
        self.count.fetch_add(k, Ordering::Relaxed);
    }
}

/// A finite sum of smooth components plus an L1 term.
///
/// Implementors provide unmetered evaluation; optimizers reach the components
/// only through the metered [`CompositeProblem::eval_component`] and
/// [`CompositeProblem::eval_all_components`].
pub trait CompositeProblem: Send + Sync {
    fn num_components(&self) -> usize;
    fn dim(&self) -> usize;
    /// Smoothness constant shared by every component.
    fn smoothness(&self) -> f64;
    /// Strong-convexity constant shared by every component.
    fn strong_convexity(&self) -> f64;
    fn l1_weight(&self) -> f64;

    fn component_value_unmetered(&self, i: usize, x: &[f64]) -> f64;

    /// Writes `f_i(x)` for every `i` into `out`.
    fn component_values_with(&self, x: &[f64], out: &mut [f64], exec: Exec) {
        exec.fill(out, |i| self.component_value_unmetered(i, x));
    }

    fn has_analytic_gradient(&self) -> bool {
        false
    }

    /// Exact `∇f_i(x)`. Test oracle only; never metered.
    fn component_grad(&self, _i: usize, _x: &[f64]) -> Result<DenseVector> {
        Err(Error::UnavailableGradient)
    }

    fn condition_number(&self) -> f64 {
        self.smoothness() / self.strong_convexity()
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `f_i(x)`, charging one oracle call.
    fn eval_component(&self, i: usize, x: &[f64], counter: &SzoCounter) -> Result<f64> {
        let n = self.num_components();
        if i >= n {
            return Err(Error::ComponentIndex { index: i, n });
        }
        self.check_dim(x)?;
        counter.add(1);
        Ok(self.component_value_unmetered(i, x))
    }

    /// All `f_i(x)` in index order, charging `n` oracle calls.
    fn eval_all_components(&self, x: &[f64], counter: &SzoCounter) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let n = self.num_components();
        let mut out = vec![0.0; n];
        self.component_values_with(x, &mut out, pass_policy(n));
        counter.add(n as u64);
        Ok(out)
    }

    /// `f(x) = (1/n) Σ f_i(x)`, unmetered.
    fn smooth_value(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        let n = self.num_components();
        let mut out = vec![0.0; n];
        self.component_values_with(x, &mut out, pass_policy(n));
        Ok(out.iter().sum::<f64>() / n as f64)
    }

    /// `F(x) = f(x) + λ1‖x‖₁`. Reporting path; never metered.
    fn full_objective(&self, x: &[f64]) -> Result<f64> {
        let f = self.smooth_value(x)?;
        Ok(f + self.l1_weight() * x.iter().map(|v| v.abs()).sum::<f64>())
    }

    /// Exact `∇f(x)`, summed in index order.
    fn full_gradient(&self, x: &[f64]) -> Result<DenseVector> {
        self.check_dim(x)?;
        let n = self.num_components();
        let grads = pass_policy(n).map(n, |i| self.component_grad(i, x));
        let mut acc = vec![0.0; self.dim()];
        for g in grads {
            crate::linalg::axpy(1.0, &g?, &mut acc);
        }
        let inv = 1.0 / n as f64;
        acc.iter_mut().for_each(|v| *v *= inv);
        Ok(DenseVector::from_raw(acc))
    }

    /// `argmin_y λ1‖y‖₁ + ‖y − x‖² / (2η)`, i.e. soft-thresholding at `η λ1`.
    fn prox_step(&self, x: &[f64], eta: f64) -> Result<DenseVector> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::InvalidStep(eta));
        }
        self.check_dim(x)?;
        let mut out = x.to_vec();
        soft_threshold_in_place(&mut out, eta * self.l1_weight());
        Ok(DenseVector::from_raw(out))
    }
}

pub(crate) fn pass_policy(n: usize) -> Exec {
    if n >= PARALLEL_PASS_MIN {
        Exec::default()
    } else {
        Exec::Sequential
    }
}

/// Prox step on a buffer the caller owns; `eta` is validated by the caller.
pub(crate) fn prox_in_place<P: CompositeProblem + ?Sized>(problem: &P, x: &mut [f64], eta: f64) {
    soft_threshold_in_place(x, eta * problem.l1_weight());
}

pub(crate) fn validate_constants(l: f64, mu: f64, lambda1: f64, n: usize, d: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidInput(
            "problem needs at least one component".into(),
        ));
    }
    if d == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if !(lambda1 >= 0.0) || !lambda1.is_finite() {
        return Err(Error::InvalidInput(format!(
            "lambda1 must be >= 0, got {lambda1}"
        )));
    }
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::NotStronglyConvex(mu));
    }
    if !(l >= mu) || !l.is_finite() {
        return Err(Error::InvalidInput(format!(
            "smoothness {l} must be finite and at least mu = {mu}"
        )));
    }
    Ok(())
}
