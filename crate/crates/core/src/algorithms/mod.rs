//! Optimizers behind one step contract, and the budgeted driver that records
//! their convergence histories.
//!
//! Every optimizer draws all randomness for an iteration first, computes the
//! exact oracle cost of that iteration, and refuses to start it if the cost
//! would push the counter past the budget. A finished run therefore never
//! exceeds its budget and stops within one iteration's cost of it.

mod pgd;
mod sega;
mod zpdvr;
mod zpsvrg;

use serde::{Deserialize, Serialize};

pub use pgd::{Pgd, PgdConfig};
pub use sega::{Sega, SegaConfig};
pub use zpdvr::{Refresh, Zpdvr, ZpdvrConfig};
pub use zpsvrg::{Zpsvrg, ZpsvrgConfig};

use crate::error::{Error, Result};
use crate::harness::reference::ReferenceOptimum;
use crate::linalg::DenseVector;
use crate::objective::{CompositeProblem, SzoCounter};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Stepped,
    /// The next iteration would exceed the budget; nothing was evaluated.
    BudgetExhausted,
}

pub trait Optimizer: Send {
    fn name(&self) -> &'static str;
    fn iterate(&self) -> &DenseVector;
    /// Completed iterations.
    fn iteration(&self) -> u64;
    fn step(
        &mut self,
        problem: &dyn CompositeProblem,
        counter: &SzoCounter,
        budget: u64,
    ) -> Result<StepOutcome>;
}

pub(crate) fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::InvalidStep(eta));
    }
    Ok(())
}

pub(crate) fn affordable(counter: &SzoCounter, cost: u64, budget: u64) -> bool {
    counter.count().saturating_add(cost) <= budget
}

/// Any of the four optimizers with its hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum AlgorithmSpec {
    Zpdvr(ZpdvrConfig),
    Pgd(PgdConfig),
    Zpsvrg(ZpsvrgConfig),
    Sega(SegaConfig),
}

impl AlgorithmSpec {
    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmSpec::Zpdvr(_) => "zpdvr",
            AlgorithmSpec::Pgd(_) => "pgd",
            AlgorithmSpec::Zpsvrg(_) => "zpsvrg",
            AlgorithmSpec::Sega(_) => "sega",
        }
    }

    pub fn build(
        &self,
        problem: &dyn CompositeProblem,
        x0: DenseVector,
        seed: u64,
    ) -> Result<Box<dyn Optimizer>> {
        Ok(match self {
            AlgorithmSpec::Zpdvr(cfg) => Box::new(Zpdvr::new(problem, x0, cfg.clone(), seed)?),
            AlgorithmSpec::Pgd(cfg) => Box::new(Pgd::new(problem, x0, cfg.clone())?),
            AlgorithmSpec::Zpsvrg(cfg) => Box::new(Zpsvrg::new(problem, x0, cfg.clone(), seed)?),
            AlgorithmSpec::Sega(cfg) => Box::new(Sega::new(problem, x0, cfg.clone(), seed)?),
        })
    }

    /// Largest oracle cost of a single iteration.
    pub fn max_step_cost(&self, n: usize, d: usize) -> u64 {
        let (n, d) = (n as u64, d as u64);
        match self {
            AlgorithmSpec::Zpdvr(c) => {
                let s = &c.smoothing;
                4 * (s.batch_samples * s.batch_dirs) as u64 + 4 * n
            }
            AlgorithmSpec::Pgd(_) => n * (d + 1),
            AlgorithmSpec::Zpsvrg(c) => {
                let s = &c.smoothing;
                4 * (s.batch_samples * s.batch_dirs) as u64 + 2 * n * s.batch_dirs as u64
            }
            AlgorithmSpec::Sega(c) => 2 * n * c.batch_dirs as u64,
        }
    }
}

/// One recorded point of a run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub iter: u64,
    pub szo: u64,
    pub objective: f64,
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Budget,
    Target,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunHistory {
    pub algorithm: String,
    pub samples: Vec<Sample>,
    pub final_x: DenseVector,
    pub stop: StopReason,
}

impl RunHistory {
    pub fn last(&self) -> &Sample {
        self.samples
            .last()
            .expect("a history always holds the initial sample")
    }

    pub fn final_residual(&self) -> f64 {
        self.last().residual
    }

    /// Residual of the last sample taken at or below `szo`.
    pub fn residual_at(&self, szo: u64) -> Option<f64> {
        self.samples
            .iter()
            .take_while(|s| s.szo <= szo)
            .last()
            .map(|s| s.residual)
    }

    /// Least-squares line through `(szo, ln residual)` for the samples whose
    /// oracle count lies in `[lo, hi]` of the run's final count. Samples with
    /// a non-positive residual are skipped.
    pub fn log_residual_fit(&self, lo: f64, hi: f64) -> Option<LineFit> {
        let end = self.last().szo as f64;
        let pts: Vec<(f64, f64)> = self
            .samples
            .iter()
            .filter(|s| {
                let t = s.szo as f64;
                t >= lo * end && t <= hi * end && s.residual > 0.0
            })
            .map(|s| (s.szo as f64, s.residual.ln()))
            .collect();
        LineFit::fit(&pts)
    }
}

/// Ordinary least-squares fit `y ≈ intercept + slope·x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

impl LineFit {
    /// `None` for fewer than three points or constant `x`.
    pub fn fit(pts: &[(f64, f64)]) -> Option<LineFit> {
        if pts.len() < 3 {
            return None;
        }
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
        for &(x, y) in pts {
            sxx += (x - mx) * (x - mx);
            sxy += (x - mx) * (y - my);
            syy += (y - my) * (y - my);
        }
        if sxx == 0.0 {
            return None;
        }
        let slope = sxy / sxx;
        // a flat exact line explains everything
        let r_squared = if syy == 0.0 {
            1.0
        } else {
            sxy * sxy / (sxx * syy)
        };
        Some(LineFit {
            slope,
            intercept: my - slope * mx,
            r_squared,
            points: pts.len(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    pub budget: u64,
    /// Record a sample every this many iterations (plus start and end).
    pub sample_every: u64,
    /// Stop as soon as a sampled residual falls below this value.
    pub target_residual: Option<f64>,
}

impl RunOptions {
    pub fn new(budget: u64, sample_every: u64) -> Self {
        RunOptions {
            budget,
            sample_every: sample_every.max(1),
            target_residual: None,
        }
    }
}

/// Steps `optimizer` until its budget is spent (or the target residual is
/// reached), sampling `F(x)` and `F(x) − F*` along the way. Sampling never
/// touches the oracle counter.
pub fn run(
    optimizer: &mut dyn Optimizer,
    problem: &dyn CompositeProblem,
    opts: &RunOptions,
    reference: &ReferenceOptimum,
) -> Result<RunHistory> {
    let counter = SzoCounter::new();
    let every = opts.sample_every.max(1);
    let mut samples = vec![record(optimizer, problem, &counter, reference)?];
    let mut stop = StopReason::Budget;
    let reached = |s: &Sample| opts.target_residual.is_some_and(|t| s.residual <= t);
    if reached(&samples[0]) {
        stop = StopReason::Target;
    } else {
        loop {
            match optimizer.step(problem, &counter, opts.budget)? {
                StepOutcome::BudgetExhausted => break,
                StepOutcome::Stepped => {}
            }
            if optimizer.iteration() % every == 0 {
                let s = record(optimizer, problem, &counter, reference)?;
                samples.push(s);
                if reached(&s) {
                    stop = StopReason::Target;
                    break;
                }
            }
        }
        let last_iter = samples.last().map(|s| s.iter).unwrap_or(0);
        if optimizer.iteration() != last_iter {
            samples.push(record(optimizer, problem, &counter, reference)?);
        }
    }
    Ok(RunHistory {
        algorithm: optimizer.name().to_string(),
        samples,
        final_x: optimizer.iterate().clone(),
        stop,
    })
}

fn record(
    optimizer: &dyn Optimizer,
    problem: &dyn CompositeProblem,
    counter: &SzoCounter,
    reference: &ReferenceOptimum,
) -> Result<Sample> {
    let objective = problem.full_objective(optimizer.iterate())?;
    let residual = objective - reference.f_star;
    if residual < -10.0 * reference.tol.max(1e-13) {
        return Err(Error::ReferenceQuality { residual });
    }
    Ok(Sample {
        iter: optimizer.iteration(),
        szo: counter.count(),
        objective,
        residual,
    })
}
