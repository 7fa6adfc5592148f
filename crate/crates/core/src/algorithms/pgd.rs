use serde::{Deserialize, Serialize};

use super::{affordable, check_eta, Optimizer, StepOutcome};
use crate::error::{Error, Result};
use crate::estimators::{check_smoothing, coord_fd_gradient, DEFAULT_SMOOTHING};
use crate::linalg::DenseVector;
use crate::objective::{prox_in_place, CompositeProblem, SzoCounter};

fn default_v() -> f64 {
    DEFAULT_SMOOTHING
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PgdConfig {
    pub eta: f64,
    #[serde(default = "default_v")]
    pub v: f64,
}

/// Proximal gradient descent on coordinate forward-difference gradients.
/// Each iteration costs exactly `n (d + 1)` oracle calls.
#[derive(Clone, Debug)]
pub struct Pgd {
    cfg: PgdConfig,
    x: DenseVector,
    k: u64,
}

impl Pgd {
    pub fn new(problem: &dyn CompositeProblem, x0: DenseVector, cfg: PgdConfig) -> Result<Self> {
        check_eta(cfg.eta)?;
        check_smoothing(cfg.v)?;
        problem.check_dim(&x0)?;
        Ok(Pgd { cfg, x: x0, k: 0 })
    }
}

impl Optimizer for Pgd {
    fn name(&self) -> &'static str {
        "pgd"
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
        let cost = problem.num_components() as u64 * (problem.dim() as u64 + 1);
        if !affordable(counter, cost, budget) {
            return Ok(StepOutcome::BudgetExhausted);
        }
        let g = coord_fd_gradient(problem, &self.x, self.cfg.v, counter)?;
        self.x.axpy(-self.cfg.eta, &g);
        prox_in_place(problem, self.x.as_mut_slice(), self.cfg.eta);
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

    #[test]
    fn one_dimensional_hand_iteration() {
        // f = ½(x − 2)², λ1 = 1, η = 0.5, x0 = 0
        let p =
            QuadraticLassoProblem::with_offsets(vec![vec![1.0]], vec![vec![2.0]], vec![2.0], 1.0)
                .unwrap();
        let mut opt = Pgd::new(&p, DenseVector::zeros(1), PgdConfig { eta: 0.5, v: 1e-8 }).unwrap();
        let c = SzoCounter::new();
        opt.step(&p, &c, u64::MAX).unwrap();
        assert!((opt.iterate()[0] - 0.5).abs() < 1e-7);
        assert_eq!(c.count(), 2);
    }

    #[test]
    fn cost_per_iteration_is_n_times_d_plus_one() {
        let p =
            QuadraticLassoProblem::new(vec![vec![1.0; 4]; 3], vec![vec![1.0; 4]; 3], 0.1).unwrap();
        let mut opt = Pgd::new(&p, DenseVector::zeros(4), PgdConfig { eta: 0.5, v: 1e-6 }).unwrap();
        let c = SzoCounter::new();
        for k in 1..=5 {
            opt.step(&p, &c, u64::MAX).unwrap();
            assert_eq!(c.count(), k * 15);
        }
        assert_eq!(opt.step(&p, &c, 80).unwrap(), StepOutcome::BudgetExhausted);
        assert_eq!(c.count(), 75);
    }
}
