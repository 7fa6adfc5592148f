use serde::{Deserialize, Serialize};

use super::{affordable, check_eta, Optimizer, StepOutcome};
use crate::error::{Error, Result};
use crate::estimators::{batched_dir_estimate, full_directional_difference, SmoothingConfig};
use crate::linalg::DenseVector;
use crate::objective::{prox_in_place, CompositeProblem, SzoCounter};
use crate::rng::{gaussian_vector, SeededRng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZpsvrgConfig {
    pub eta: f64,
    /// Inner iterations per snapshot.
    pub m: u64,
    #[serde(default)]
    pub smoothing: SmoothingConfig,
}

/// Zeroth-order proximal SVRG with a random-direction snapshot gradient.
///
/// At each snapshot `w = x` the full estimate `μ̂ = ∇̂f(w, u)` is taken along
/// fresh directions (`2n` calls per direction); the `m` inner steps use
/// `g = ∇̂f_i(x, u_k) − ∇̂f_i(w, u_k) + μ̂`. The snapshot keeps the
/// coordinate-wise variance of `μ̂`, which does not vanish at the optimum of a
/// composite problem.
#[derive(Clone, Debug)]
pub struct Zpsvrg {
    cfg: ZpsvrgConfig,
    x: DenseVector,
    w: DenseVector,
    snapshot_grad: DenseVector,
    last_grad: DenseVector,
    inner: u64,
    k: u64,
    rng: SeededRng,
}

impl Zpsvrg {
    pub fn new(
        problem: &dyn CompositeProblem,
        x0: DenseVector,
        cfg: ZpsvrgConfig,
        seed: u64,
    ) -> Result<Self> {
        check_eta(cfg.eta)?;
        cfg.smoothing.validate()?;
        if cfg.m == 0 {
            return Err(Error::InvalidInput("inner loop length must be >= 1".into()));
        }
        problem.check_dim(&x0)?;
        let d = problem.dim();
        Ok(Zpsvrg {
            w: x0.clone(),
            x: x0,
            snapshot_grad: DenseVector::zeros(d),
            last_grad: DenseVector::zeros(d),
            inner: 0,
            k: 0,
            rng: SeededRng::new(seed),
            cfg,
        })
    }

    pub fn snapshot_gradient(&self) -> &DenseVector {
        &self.snapshot_grad
    }

    pub fn last_gradient(&self) -> &DenseVector {
        &self.last_grad
    }
}

impl Optimizer for Zpsvrg {
    fn name(&self) -> &'static str {
        "zpsvrg"
    }

    fn iterate(&self) -> &DenseVector {
        &self.x
    }

    fn iteration(&self) -> u64 {
        self.k
    }

    fn step(
        &mut self,
        problem: &dyn CompositeProblem,
        counter: &SzoCounter,
        budget: u64,
    ) -> Result<StepOutcome> {
        let n = problem.num_components();
        let d = problem.dim();
        let s = self.cfg.smoothing;
        let snapshot = self.inner == 0;
        let snap_dirs = if snapshot {
            (0..s.batch_dirs)
                .map(|_| gaussian_vector(&mut self.rng, d))
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        let samples: Vec<usize> = (0..s.batch_samples).map(|_| self.rng.index(n)).collect();
        let dirs = (0..s.batch_dirs)
            .map(|_| gaussian_vector(&mut self.rng, d))
            .collect::<Result<Vec<_>>>()?;

        let cost =
            4 * (s.batch_samples * s.batch_dirs) as u64 + 2 * n as u64 * snap_dirs.len() as u64;
        if !affordable(counter, cost, budget) {
            return Ok(StepOutcome::BudgetExhausted);
        }

        if snapshot {
            self.w = self.x.clone();
            let mut mu = vec![0.0; d];
            for u in &snap_dirs {
                let c = full_directional_difference(problem, &self.w, u, s.v, counter)?;
                crate::linalg::axpy(c / snap_dirs.len() as f64, u, &mut mu);
            }
            self.snapshot_grad = DenseVector::from_raw(mu);
        }
        let at_x = batched_dir_estimate(problem, &samples, &self.x, &dirs, s.v, counter)?;
        let at_w = batched_dir_estimate(problem, &samples, &self.w, &dirs, s.v, counter)?;
        let mut g = at_x.sub(&at_w);
        g.axpy(1.0, &self.snapshot_grad);

        self.x.axpy(-self.cfg.eta, &g);
        prox_in_place(problem, self.x.as_mut_slice(), self.cfg.eta);
        self.last_grad = g;
        self.inner = (self.inner + 1) % self.cfg.m;
        self.k += 1;
        if !self.x.is_finite() {
            return Err(Error::Diverged { iteration: self.k });
        }
        Ok(StepOutcome::Stepped)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::QuadraticLassoProblem;

    fn problem() -> QuadraticLassoProblem {
        QuadraticLassoProblem::new(
            vec![vec![1.0, 2.0], vec![3.0, 0.5], vec![1.5, 1.5]],
            vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 2.0]],
            0.1,
        )
        .unwrap()
    }

    #[test]
    fn outer_cycle_costs_two_n_plus_four_m() {
        let p = problem();
        let cfg = ZpsvrgConfig {
            eta: 0.05,
            m: 7,
            smoothing: SmoothingConfig::with_v(1e-4),
        };
        let mut opt = Zpsvrg::new(&p, DenseVector::zeros(2), cfg, 2).unwrap();
        let c = SzoCounter::new();
        for cycle in 1..=4u64 {
            for _ in 0..7 {
                opt.step(&p, &c, u64::MAX).unwrap();
            }
            assert_eq!(c.count(), cycle * (2 * 3 + 4 * 7));
        }
    }

    #[test]
    fn single_inner_step_uses_snapshot_gradient() {
        let p = problem();
        let cfg = ZpsvrgConfig {
            eta: 0.05,
            m: 1,
            smoothing: SmoothingConfig::with_v(1e-4),
        };
        let mut opt = Zpsvrg::new(&p, DenseVector::new(vec![0.5, -0.5]).unwrap(), cfg, 9).unwrap();
        let c = SzoCounter::new();
        for _ in 0..5 {
            opt.step(&p, &c, u64::MAX).unwrap();
            assert_eq!(opt.last_gradient(), opt.snapshot_gradient());
        }
    }
}
