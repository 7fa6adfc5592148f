use super::{validate_constants, CompositeProblem};
use crate::error::{Error, Result};
use crate::linalg::{dot, DenseVector, SparseRow};
use crate::par::Exec;

/// Ridge-regularized logistic loss with an L1 term:
/// `f_i(x) = log(1 + exp(−y_i zᵢᵀx)) + (λ2/2)‖x‖²`, `ψ = λ1‖x‖₁`.
#[derive(Clone, Debug)]
pub struct LogisticProblem {
    rows: Vec<SparseRow>,
    labels: Vec<f64>,
    lambda1: f64,
    lambda2: f64,
    dim: usize,
    smoothness: f64,
}

impl LogisticProblem {
    /// `labels` must be ±1 and every row must have dimension `dim`.
    pub fn new(rows: Vec<SparseRow>, labels: Vec<i8>, lambda1: f64, lambda2: f64) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::InvalidInput(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let dim = rows.first().map(SparseRow::dim).unwrap_or(0);
        if let Some(r) = rows.iter().find(|r| r.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: r.dim(),
            });
        }
        if let Some(y) = labels.iter().find(|y| **y != 1 && **y != -1) {
            return Err(Error::InvalidInput(format!("label {y} is not ±1")));
        }
        let max_sq = rows.iter().map(SparseRow::norm_sq).fold(0.0, f64::max);
        let smoothness = max_sq / 4.0 + lambda2;
        validate_constants(smoothness, lambda2, lambda1, rows.len(), dim)?;
        Ok(LogisticProblem {
            labels: labels.into_iter().map(f64::from).collect(),
            rows,
            lambda1,
            lambda2,
            dim,
            smoothness,
        })
    }

    pub fn rows(&self) -> &[SparseRow] {
        &self.rows
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    #[inline]
    fn value_with_norm(&self, i: usize, x: &[f64], norm_sq: f64) -> f64 {
        let t = self.labels[i] * self.rows[i].dot(x);
        logistic_loss(t) + 0.5 * self.lambda2 * norm_sq
    }
}

/// `log(1 + exp(−t))` without overflow.
#[inline]
pub(crate) fn logistic_loss(t: f64) -> f64 {
    (-t.abs()).exp().ln_1p() + (-t).max(0.0)
}

/// `1 / (1 + exp(t))` without overflow.
#[inline]
fn sigmoid_neg(t: f64) -> f64 {
    if t >= 0.0 {
        let e = (-t).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + t.exp())
    }
}

impl CompositeProblem for LogisticProblem {
    fn num_components(&self) -> usize {
        self.rows.len()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn smoothness(&self) -> f64 {
        self.smoothness
    }

    fn strong_convexity(&self) -> f64 {
        self.lambda2
    }

    fn l1_weight(&self) -> f64 {
        self.lambda1
    }

    fn component_value_unmetered(&self, i: usize, x: &[f64]) -> f64 {
        self.value_with_norm(i, x, dot(x, x))
    }

    fn component_values_with(&self, x: &[f64], out: &mut [f64], exec: Exec) {
        let norm_sq = dot(x, x);
        exec.fill(out, |i| self.value_with_norm(i, x, norm_sq));
    }

    fn has_analytic_gradient(&self) -> bool {
        true
    }

    fn component_grad(&self, i: usize, x: &[f64]) -> Result<DenseVector> {
        let n = self.rows.len();
        if i >= n {
            return Err(Error::ComponentIndex { index: i, n });
        }
        self.check_dim(x)?;
        let y = self.labels[i];
        let t = y * self.rows[i].dot(x);
        let mut g: Vec<f64> = x.iter().map(|v| self.lambda2 * v).collect();
        self.rows[i].axpy_into(-y * sigmoid_neg(t), &mut g);
        Ok(DenseVector::from_raw(g))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::SzoCounter;
    use crate::rng::{gaussian_vector, SeededRng};

    fn small_problem() -> LogisticProblem {
        let rows = vec![
            SparseRow::new(vec![0, 2], vec![1.0, -2.0], 3).unwrap(),
            SparseRow::new(vec![1], vec![0.5], 3).unwrap(),
            SparseRow::new(vec![0, 1, 2], vec![0.3, 0.7, 1.1], 3).unwrap(),
        ];
        LogisticProblem::new(rows, vec![1, -1, 1], 0.01, 0.1).unwrap()
    }

    #[test]
    fn value_at_origin_is_log_two() {
        let p = small_problem();
        let c = SzoCounter::new();
        for i in 0..3 {
            let v = p.eval_component(i, &[0.0; 3], &c).unwrap();
            assert!((v - std::f64::consts::LN_2).abs() < 1e-15);
        }
        assert!((p.full_objective(&[0.0; 3]).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn gradient_at_origin_is_half_label_times_row() {
        let p = small_problem();
        let g = p.component_grad(0, &[0.0; 3]).unwrap();
        // σ(0) = 1/2, so ∇f_0(0) = −(y/2) z
        assert_eq!(g.as_slice(), &[-0.5, 0.0, 1.0]);
        let g = p.component_grad(1, &[0.0; 3]).unwrap();
        assert_eq!(g.as_slice(), &[0.0, 0.25, 0.0]);
    }

    #[test]
    fn constants() {
        let p = small_problem();
        assert!((p.smoothness() - (5.0 / 4.0 + 0.1)).abs() < 1e-15);
        assert_eq!(p.strong_convexity(), 0.1);
    }

    #[test]
    fn stable_for_large_margins() {
        assert!((logistic_loss(1000.0)).abs() < 1e-300);
        assert!((logistic_loss(-1000.0) - 1000.0).abs() < 1e-9);
        assert!(logistic_loss(-1e308).is_finite());
    }

    #[test]
    fn rejects_bad_labels_and_zero_ridge() {
        let rows = vec![SparseRow::new(vec![0], vec![1.0], 1).unwrap()];
        assert!(LogisticProblem::new(rows.clone(), vec![0], 0.0, 0.1).is_err());
        assert!(matches!(
            LogisticProblem::new(rows, vec![1], 0.0, 0.0),
            Err(Error::NotStronglyConvex(_))
        ));
    }

    #[test]
    fn gradient_matches_central_differences() {
        let p = small_problem();
        let mut rng = SeededRng::new(5);
        for _ in 0..20 {
            let x = gaussian_vector(&mut rng, 3).unwrap();
            for i in 0..3 {
                let g = p.component_grad(i, &x).unwrap();
                let h = 1e-6;
                for j in 0..3 {
                    let mut xp = x.to_vec();
                    let mut xm = x.to_vec();
                    xp[j] += h;
                    xm[j] -= h;
                    let fd = (p.component_value_unmetered(i, &xp)
                        - p.component_value_unmetered(i, &xm))
                        / (2.0 * h);
                    assert!(
                        (fd - g[j]).abs() <= 1e-5 * (1.0 + g[j].abs()),
                        "fd {fd} vs {}",
                        g[j]
                    );
                }
            }
        }
    }
}
