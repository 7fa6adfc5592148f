use super::CompositeProblem;
use crate::error::{Error, Result};
use crate::linalg::{dot, DenseVector};

/// Affine components `f_i(x) = c_iᵀx + e_i` with `ψ = λ1‖x‖₁`.
///
/// Directional differences are exact for every `v`, which makes this the
/// fixture for checking estimators and learners without smoothing bias. It is
/// not strongly convex, so it is never handed to the optimizers' theory.
#[derive(Clone, Debug)]
pub struct LinearProblem {
    slopes: Vec<Vec<f64>>,
    offsets: Vec<f64>,
    lambda1: f64,
    dim: usize,
}

impl LinearProblem {
    pub fn new(slopes: Vec<Vec<f64>>, lambda1: f64) -> Result<Self> {
        let n = slopes.len();
        if n == 0 {
            return Err(Error::InvalidInput(
                "problem needs at least one component".into(),
            ));
        }
        let dim = slopes[0].len();
        if dim == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if let Some(s) = slopes.iter().find(|s| s.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: s.len(),
            });
        }
        Ok(LinearProblem {
            slopes,
            offsets: vec![0.0; n],
            lambda1,
            dim,
        })
    }

    pub fn with_offsets(mut self, offsets: Vec<f64>) -> Result<Self> {
        if offsets.len() != self.slopes.len() {
            return Err(Error::InvalidInput("one offset per component".into()));
        }
        self.offsets = offsets;
        Ok(self)
    }

    /// `∇f = (1/n) Σ c_i`.
    pub fn mean_slope(&self) -> DenseVector {
        let mut acc = vec![0.0; self.dim];
        for s in &self.slopes {
            crate::linalg::axpy(1.0, s, &mut acc);
        }
        let inv = 1.0 / self.slopes.len() as f64;
        DenseVector::from_raw(acc.into_iter().map(|a| a * inv).collect())
    }
}

impl CompositeProblem for LinearProblem {
    fn num_components(&self) -> usize {
        self.slopes.len()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn smoothness(&self) -> f64 {
        0.0
    }

    fn strong_convexity(&self) -> f64 {
        0.0
    }

    fn l1_weight(&self) -> f64 {
        self.lambda1
    }

    fn component_value_unmetered(&self, i: usize, x: &[f64]) -> f64 {
        dot(&self.slopes[i], x) + self.offsets[i]
    }

    fn has_analytic_gradient(&self) -> bool {
        true
    }

    fn component_grad(&self, i: usize, x: &[f64]) -> Result<DenseVector> {
        let n = self.slopes.len();
        if i >= n {
            return Err(Error::ComponentIndex { index: i, n });
        }
        self.check_dim(x)?;
        Ok(DenseVector::from_raw(self.slopes[i].clone()))
    }
}
