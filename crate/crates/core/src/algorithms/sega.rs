use serde::{Deserialize, Serialize};

use super::{affordable, check_eta, Optimizer, StepOutcome};
use crate::error::{Error, Result};
use crate::estimators::{check_smoothing, full_directional_difference, DEFAULT_SMOOTHING};
use crate::linalg::DenseVector;
use crate::objective::{prox_in_place, CompositeProblem, SzoCounter};
use crate::rng::{gaussian_vector, SeededRng};

fn default_v() -> f64 {
    DEFAULT_SMOOTHING
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegaConfig {
    pub eta: f64,
    #[serde(default = "default_v")]
    pub v: f64,
    /// Sketch directions applied per iteration.
    #[serde(default = "one")]
    pub batch_dirs: usize,
}

/// Sketch-and-project gradient learning from full directional differences.
///
/// Per direction `u`: `h ← h + u (s − uᵀh) / ‖u‖²` with
/// `s = (f(x + v u) − f(x)) / v` (`2n` calls), then `x ← prox(x − η h)`.
#[derive(Clone, Debug)]
pub struct Sega {
    cfg: SegaConfig,
    x: DenseVector,
    h: DenseVector,
    k: u64,
    rng: SeededRng,
}

impl Sega {
    pub fn new(
        problem: &dyn CompositeProblem,
        x0: DenseVector,
        cfg: SegaConfig,
        seed: u64,
    ) -> Result<Self> {
        Sega::with_estimate(problem, x0, DenseVector::zeros(problem.dim()), cfg, seed)
    }

    pub fn with_estimate(
        problem: &dyn CompositeProblem,
        x0: DenseVector,
        h0: DenseVector,
        cfg: SegaConfig,
        seed: u64,
    ) -> Result<Self> {
        check_eta(cfg.eta)?;
        check_smoothing(cfg.v)?;
        if cfg.batch_dirs == 0 {
            return Err(Error::InvalidBatch("batch_dirs must be >= 1".into()));
        }
        problem.check_dim(&x0)?;
        problem.check_dim(&h0)?;
        Ok(Sega {
            x: x0,
            h: h0,
            k: 0,
            rng: SeededRng::new(seed),
            cfg,
        })
    }

    pub fn estimate(&self) -> &DenseVector {
        &self.h
    }
}

impl Optimizer for Sega {
    fn name(&self) -> &'static str {
        "sega"
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
        let d = problem.dim();
        let dirs = (0..self.cfg.batch_dirs)
            .map(|_| gaussian_vector(&mut self.rng, d))
            .collect::<Result<Vec<_>>>()?;
        let cost = 2 * problem.num_components() as u64 * dirs.len() as u64;
        if !affordable(counter, cost, budget) {
            return Ok(StepOutcome::BudgetExhausted);
        }
        for u in &dirs {
            let s = full_directional_difference(problem, &self.x, u, self.cfg.v, counter)?;
            let coef = (s - u.dot(&self.h)) / u.norm_sq();
            self.h.axpy(coef, u);
        }
        self.x.axpy(-self.cfg.eta, &self.h);
        prox_in_place(problem, self.x.as_mut_slice(), self.cfg.eta);
        self.k += 1;
        if !self.x.is_finite() || !self.h.is_finite() {
            return Err(Error::Diverged { iteration: self.k });
        }
        Ok(StepOutcome::Stepped)
    }
}
