//! The direction-averaged gradient learner `h̃` and the reference gradient
//! built from it.
//!
//! `h̃` is refined one Gaussian direction at a time:
//! `h̃ ← h̃ + (1/(d+2)) (∇̂f(x, u) − u uᵀ h̃)`. The reference gradient at a
//! snapshot `w` replaces the component of `h̃` along a fresh direction `u` with
//! the measured directional derivative: `h̃ + ∇̂f(w, u) − u uᵀ h̃`.

use crate::error::Result;
use crate::estimators::full_directional_difference;
use crate::linalg::{dot, DenseVector};
use crate::objective::{CompositeProblem, SzoCounter};

#[derive(Clone, Debug, PartialEq)]
pub struct GradientLearner {
    h_tilde: DenseVector,
    saved_dir: DenseVector,
}

impl GradientLearner {
    /// Zero estimate; the saved direction is zero until the first refresh.
    pub fn new(d: usize) -> Self {
        GradientLearner {
            h_tilde: DenseVector::zeros(d),
            saved_dir: DenseVector::zeros(d),
        }
    }

    pub fn with_estimate(h_tilde: DenseVector) -> Self {
        let d = h_tilde.len();
        GradientLearner {
            h_tilde,
            saved_dir: DenseVector::zeros(d),
        }
    }

    pub fn estimate(&self) -> &DenseVector {
        &self.h_tilde
    }

    pub fn saved_dir(&self) -> &DenseVector {
        &self.saved_dir
    }

    /// Refines `h̃` at `x` along the direction saved by the last
    /// [`GradientLearner::reference_gradient`] call. `2n` oracle calls.
    pub fn update<P: CompositeProblem + ?Sized>(
        &mut self,
        problem: &P,
        x: &[f64],
        v: f64,
        counter: &SzoCounter,
    ) -> Result<()> {
        problem.check_dim(&self.h_tilde)?;
        let u = &self.saved_dir;
        let s = full_directional_difference(problem, x, u, v, counter)?;
        let d = u.len() as f64;
        let coef = (s - dot(u, &self.h_tilde)) / (d + 2.0);
        let u = self.saved_dir.clone();
        self.h_tilde.axpy(coef, &u);
        Ok(())
    }

    /// Stores `fresh_u` as the saved direction and returns
    /// `h̃ + ∇̂f(w, u) − u uᵀ h̃`. `2n` oracle calls; `h̃` is untouched.
    pub fn reference_gradient<P: CompositeProblem + ?Sized>(
        &mut self,
        problem: &P,
        w: &[f64],
        fresh_u: DenseVector,
        v: f64,
        counter: &SzoCounter,
    ) -> Result<DenseVector> {
        problem.check_dim(&fresh_u)?;
        let s = full_directional_difference(problem, w, &fresh_u, v, counter)?;
        let coef = s - dot(&fresh_u, &self.h_tilde);
        let mut out = self.h_tilde.clone();
        out.axpy(coef, &fresh_u);
        self.saved_dir = fresh_u;
        Ok(out)
    }
}
