use serde::{Deserialize, Serialize};

use super::{affordable, check_eta, Optimizer, StepOutcome};
use crate::error::{Error, Result};
use crate::estimators::{batched_dir_estimate, SmoothingConfig};
use crate::learner::GradientLearner;
use crate::linalg::DenseVector;
use crate::objective::{prox_in_place, CompositeProblem, SzoCounter};
use crate::rng::{gaussian_vector, SeededRng};

/// When the reference point `w` is moved to the current iterate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Refresh {
    /// Coin flip with success probability `p` each iteration.
    Bernoulli { p: f64 },
    /// Every `every` iterations.
    Periodic { every: u64 },
}

impl Refresh {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Refresh::Bernoulli { p } if !(p > 0.0 && p <= 1.0) => Err(Error::InvalidInput(
                format!("refresh probability must lie in (0, 1], got {p}"),
            )),
            Refresh::Periodic { every: 0 } => {
                Err(Error::InvalidInput("refresh period must be >= 1".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZpdvrConfig {
    pub eta: f64,
    pub refresh: Refresh,
    #[serde(default)]
    pub smoothing: SmoothingConfig,
}

impl ZpdvrConfig {
    /// Coin-flip refresh with `p = 1/n`.
    pub fn new(eta: f64, n: usize, smoothing: SmoothingConfig) -> Self {
        ZpdvrConfig {
            eta,
            refresh: Refresh::Bernoulli { p: 1.0 / n as f64 },
            smoothing,
        }
    }
}

/// Zeroth-order proximal double variance reduction.
///
/// Each iteration uses
/// `g_k = ∇̂f_i(x_k, u_k) − ∇̂f_i(w_k, u_k) + ∇̃f(w_k)` and
/// `x_{k+1} = prox(x_k − η g_k)`. When the refresh rule fires, `w` becomes
/// the pre-update iterate `x_k` and the learner is refined there along the
/// saved direction; the next iteration then recomputes `∇̃f(w)` along a new
/// direction.
#[derive(Clone, Debug)]
pub struct Zpdvr {
    cfg: ZpdvrConfig,
    x: DenseVector,
    w: DenseVector,
    learner: GradientLearner,
    ref_grad: DenseVector,
    last_grad: DenseVector,
    refresh_pending: bool,
    k: u64,
    rng: SeededRng,
}

impl Zpdvr {
    pub fn new(
        problem: &dyn CompositeProblem,
        x0: DenseVector,
        cfg: ZpdvrConfig,
        seed: u64,
    ) -> Result<Self> {
        let d = problem.dim();
        Zpdvr::with_learner(problem, x0, GradientLearner::new(d), cfg, seed)
    }

    /// Starts from a given learner state instead of `h̃₀ = 0`.
    pub fn with_learner(
        problem: &dyn CompositeProblem,
        x0: DenseVector,
        learner: GradientLearner,
        cfg: ZpdvrConfig,
        seed: u64,
    ) -> Result<Self> {
        check_eta(cfg.eta)?;
        cfg.refresh.validate()?;
        cfg.smoothing.validate()?;
        problem.check_dim(&x0)?;
        problem.check_dim(learner.estimate())?;
        let d = problem.dim();
        Ok(Zpdvr {
            w: x0.clone(),
            x: x0,
            learner,
            ref_grad: DenseVector::zeros(d),
            last_grad: DenseVector::zeros(d),
            refresh_pending: true,
            k: 0,
            rng: SeededRng::new(seed),
            cfg,
        })
    }

    pub fn config(&self) -> &ZpdvrConfig {
        &self.cfg
    }

    pub fn reference_point(&self) -> &DenseVector {
        &self.w
    }

    pub fn learner(&self) -> &GradientLearner {
        &self.learner
    }

    /// `∇̃f(w)` as cached at the last refresh.
    pub fn reference_gradient(&self) -> &DenseVector {
        &self.ref_grad
    }

    /// `g_k` of the last completed iteration.
    pub fn last_gradient(&self) -> &DenseVector {
        &self.last_grad
    }
}

impl Optimizer for Zpdvr {
    fn name(&self) -> &'static str {
        "zpdvr"
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

        let fresh_u = if self.refresh_pending {
            Some(gaussian_vector(&mut self.rng, d)?)
        } else {
            None
        };
        let samples: Vec<usize> = (0..s.batch_samples).map(|_| self.rng.index(n)).collect();
        let dirs = (0..s.batch_dirs)
            .map(|_| gaussian_vector(&mut self.rng, d))
            .collect::<Result<Vec<_>>>()?;
        let promote = match self.cfg.refresh {
            Refresh::Bernoulli { p } => self.rng.uniform() <= p,
            Refresh::Periodic { every } => (self.k + 1) % every == 0,
        };

        let full_pass = 2 * n as u64;
        let cost = 4 * (s.batch_samples * s.batch_dirs) as u64
            + if fresh_u.is_some() { full_pass } else { 0 }
            + if promote { full_pass } else { 0 };
        if !affordable(counter, cost, budget) {
            return Ok(StepOutcome::BudgetExhausted);
        }

        if let Some(u) = fresh_u {
            self.ref_grad = self
                .learner
                .reference_gradient(problem, &self.w, u, s.v, counter)?;
        }
        let at_x = batched_dir_estimate(problem, &samples, &self.x, &dirs, s.v, counter)?;
        let at_w = batched_dir_estimate(problem, &samples, &self.w, &dirs, s.v, counter)?;
        let mut g = at_x.sub(&at_w);
        g.axpy(1.0, &self.ref_grad);

        let mut next = self.x.clone();
        next.axpy(-self.cfg.eta, &g);
        prox_in_place(problem, next.as_mut_slice(), self.cfg.eta);

        if promote {
            self.w = self.x.clone();
            self.learner.update(problem, &self.w, s.v, counter)?;
        }
        self.refresh_pending = promote;
        self.x = next;
        self.last_grad = g;
        self.k += 1;
        if !self.x.is_finite() || !self.learner.estimate().is_finite() {
            return Err(Error::Diverged { iteration: self.k });
        }
        Ok(StepOutcome::Stepped)
    }
}
