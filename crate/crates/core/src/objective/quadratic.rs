use super::{validate_constants, CompositeProblem};
use crate::error::{Error, Result};
use crate::linalg::DenseVector;

/// Separable quadratics `f_i(x) = ½ xᵀA_i x − b_iᵀx + c_i` with diagonal,
/// positive `A_i`, plus `λ1‖x‖₁`.
///
/// `L` is the largest and `μ` the smallest diagonal entry over all components.
#[derive(Clone, Debug)]
pub struct QuadraticLassoProblem {
    curvature: Vec<Vec<f64>>,
    linear: Vec<Vec<f64>>,
    offsets: Vec<f64>,
    lambda1: f64,
    dim: usize,
    smoothness: f64,
    strong_convexity: f64,
}

impl QuadraticLassoProblem {
    /// `curvature[i]` is the diagonal of `A_i`, `linear[i]` is `b_i`.
    pub fn new(curvature: Vec<Vec<f64>>, linear: Vec<Vec<f64>>, lambda1: f64) -> Result<Self> {
        let n = curvature.len();
        QuadraticLassoProblem::with_offsets(curvature, linear, vec![0.0; n], lambda1)
    }

    pub fn with_offsets(
        curvature: Vec<Vec<f64>>,
        linear: Vec<Vec<f64>>,
        offsets: Vec<f64>,
        lambda1: f64,
    ) -> Result<Self> {
        let n = curvature.len();
        if linear.len() != n || offsets.len() != n {
            return Err(Error::InvalidInput(format!(
                "{n} curvature rows, {} linear rows, {} offsets",
                linear.len(),
                offsets.len()
            )));
        }
        let dim = curvature.first().map(Vec::len).unwrap_or(0);
        for (a, b) in curvature.iter().zip(&linear) {
            if a.len() != dim || b.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: if a.len() != dim { a.len() } else { b.len() },
                });
            }
        }
        let all = curvature.iter().flatten();
        if all.clone().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(Error::InvalidInput(
                "curvature entries must be positive and finite".into(),
            ));
        }
        if linear
            .iter()
            .flatten()
            .chain(&offsets)
            .any(|v| !v.is_finite())
        {
            return Err(Error::NonFinite("quadratic coefficients"));
        }
        let smoothness = all.clone().copied().fold(0.0, f64::max);
        let strong_convexity = all.copied().fold(f64::INFINITY, f64::min);
        validate_constants(smoothness, strong_convexity, lambda1, n, dim)?;
        Ok(QuadraticLassoProblem {
            curvature,
            linear,
            offsets,
            lambda1,
            dim,
            smoothness,
            strong_convexity,
        })
    }

    pub fn curvature(&self, i: usize) -> &[f64] {
        &self.curvature[i]
    }

    pub fn linear(&self, i: usize) -> &[f64] {
        &self.linear[i]
    }

    /// Diagonal of `(1/n) Σ A_i`.
    pub fn mean_curvature(&self) -> Vec<f64> {
        mean_rows(&self.curvature)
    }

    /// `(1/n) Σ b_i`.
    pub fn mean_linear(&self) -> Vec<f64> {
        mean_rows(&self.linear)
    }

    /// Minimizer of `f` alone: `(Σ A_i)⁻¹ Σ b_i`.
    pub fn unregularized_minimizer(&self) -> DenseVector {
        let a = self.mean_curvature();
        let b = self.mean_linear();
        DenseVector::from_raw(b.iter().zip(&a).map(|(b, a)| b / a).collect())
    }
}

fn mean_rows(rows: &[Vec<f64>]) -> Vec<f64> {
    let d = rows.first().map(Vec::len).unwrap_or(0);
    let mut acc = vec![0.0; d];
    for r in rows {
        for (a, v) in acc.iter_mut().zip(r) {
            *a += v;
        }
    }
    let inv = 1.0 / rows.len() as f64;
    acc.iter_mut().for_each(|a| *a *= inv);
    acc
}

impl CompositeProblem for QuadraticLassoProblem {
    fn num_components(&self) -> usize {
        self.curvature.len()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn smoothness(&self) -> f64 {
        self.smoothness
    }

    fn strong_convexity(&self) -> f64 {
        self.strong_convexity
    }

    fn l1_weight(&self) -> f64 {
        self.lambda1
    }

    fn component_value_unmetered(&self, i: usize, x: &[f64]) -> f64 {
        let a = &self.curvature[i];
        let b = &self.linear[i];
        let mut s = 0.0;
        for j in 0..x.len() {
            s += x[j] * (0.5 * a[j] * x[j] - b[j]);
        }
        s + self.offsets[i]
    }

    fn has_analytic_gradient(&self) -> bool {
        true
    }

    fn component_grad(&self, i: usize, x: &[f64]) -> Result<DenseVector> {
        let n = self.curvature.len();
        if i >= n {
            return Err(Error::ComponentIndex { index: i, n });
        }
        self.check_dim(x)?;
        let a = &self.curvature[i];
        let b = &self.linear[i];
        Ok(DenseVector::from_raw(
            x.iter()
                .zip(a)
                .zip(b)
                .map(|((x, a), b)| a * x - b)
                .collect(),
        ))
    }
}
