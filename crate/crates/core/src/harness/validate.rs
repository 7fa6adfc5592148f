//! Named validator suites with fixed problems, sample counts and seeds.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{make_logistic_dataset, make_quadratic_lasso};
use crate::error::{Error, Result};
use crate::estimators::SmoothingConfig;
use crate::linalg::DenseVector;
use crate::objective::{CompositeProblem, LogisticProblem, QuadraticLassoProblem};
use crate::par::Exec;
use crate::rng::SeededRng;
use crate::theory::{
    floor_scaling_check, lyapunov_trend_check, mc_estimator_bias_check, mc_gk_bias_check,
    mc_moment_check, mc_projection_identity, mc_second_moment_check, theoretical_schedule,
    CheckReport, FloorOptions, TrendOptions, TrendStart,
};

use super::reference::compute_reference_optimum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Moments,
    Projection,
    Estimator,
    Gk,
    Lyapunov,
    Floor,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 7] = [
        "moments",
        "projection",
        "estimator",
        "gk",
        "lyapunov",
        "floor",
        "all",
    ];

    fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![
                Suite::Moments,
                Suite::Projection,
                Suite::Estimator,
                Suite::Gk,
                Suite::Lyapunov,
                Suite::Floor,
            ],
            s => vec![s],
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "moments" => Suite::Moments,
            "projection" => Suite::Projection,
            "estimator" => Suite::Estimator,
            "gk" => Suite::Gk,
            "lyapunov" => Suite::Lyapunov,
            "floor" => Suite::Floor,
            "all" => Suite::All,
            other => {
                return Err(Error::Config(format!(
                    "unknown suite {other:?}; expected one of {}",
                    Suite::NAMES.join(", ")
                )))
            }
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ValidateOptions {
    /// Draws per Monte Carlo check; `None` uses each check's default.
    pub samples: Option<usize>,
    pub seed: u64,
    pub exec: Exec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckReport>,
    pub passed: bool,
}

/// Logistic regression on synthetic data with `n = 50`, `d = 10`.
pub fn estimator_test_problem(seed: u64) -> Result<LogisticProblem> {
    make_logistic_dataset(50, 10, 0.5, seed)?.to_problem(1e-3, 1e-2)
}

/// Well-conditioned quadratic with `n = 20`, `d = 5`, `κ = 2`.
pub fn trend_test_problem(lambda1: f64) -> Result<QuadraticLassoProblem> {
    make_quadratic_lasso(20, 5, 2.0, lambda1, 7)
}

fn random_point(rng: &mut SeededRng, d: usize, scale: f64) -> Vec<f64> {
    (0..d).map(|_| scale * rng.standard_normal()).collect()
}

pub fn validate(suite: Suite, opts: &ValidateOptions) -> Result<ValidationReport> {
    let mut checks = Vec::new();
    for s in suite.expand() {
        checks.extend(run_suite(s, opts)?);
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(ValidationReport { checks, passed })
}

fn run_suite(suite: Suite, opts: &ValidateOptions) -> Result<Vec<CheckReport>> {
    let seed = opts.seed;
    let exec = opts.exec;
    let mut out = Vec::new();
    match suite {
        Suite::Moments => {
            let n = opts.samples.unwrap_or(1_000_000);
            for (k, &(d, q)) in [2usize, 5, 20]
                .iter()
                .flat_map(|&d| [1.0, 2.0, 4.0, 6.0].map(move |q| (d, q)))
                .collect::<Vec<_>>()
                .iter()
                .enumerate()
            {
                out.push(mc_moment_check(d, q, n, seed.wrapping_add(k as u64), exec)?);
            }
        }
        Suite::Projection => {
            let n = opts.samples.unwrap_or(1_000_000);
            for (k, d) in [1usize, 3, 20].into_iter().enumerate() {
                let mut a = vec![0.0; d];
                a[0] = 1.0;
                out.push(mc_projection_identity(
                    &a,
                    n,
                    seed.wrapping_add(100 + k as u64),
                    exec,
                )?);
            }
        }
        Suite::Estimator => {
            let n = opts.samples.unwrap_or(200_000);
            let p = estimator_test_problem(1)?;
            let mut rng = SeededRng::with_stream(seed, 200);
            for k in 0..5u64 {
                let x = random_point(&mut rng, p.dim(), 0.5);
                let i = rng.index(p.num_components());
                out.push(mc_estimator_bias_check(
                    &p,
                    Some(i),
                    &x,
                    1e-3,
                    n,
                    seed.wrapping_add(200 + k),
                    exec,
                )?);
            }
            let x = random_point(&mut rng, p.dim(), 0.5);
            out.push(mc_second_moment_check(
                &p,
                &x,
                1e-3,
                n,
                seed.wrapping_add(210),
                exec,
            )?);
        }
        Suite::Gk => {
            let n = opts.samples.unwrap_or(200_000);
            let p = estimator_test_problem(1)?;
            let mut rng = SeededRng::with_stream(seed, 300);
            let x = random_point(&mut rng, p.dim(), 0.5);
            let w = random_point(&mut rng, p.dim(), 0.5);
            let h = random_point(&mut rng, p.dim(), 0.1);
            let cfg = SmoothingConfig::with_v(1e-3);
            out.push(mc_gk_bias_check(
                &p,
                &x,
                &w,
                &h,
                &cfg,
                n,
                seed.wrapping_add(300),
                exec,
            )?);
            out.push(mc_gk_bias_check(
                &p,
                &x,
                &x,
                &h,
                &cfg,
                n,
                seed.wrapping_add(301),
                exec,
            )?);
        }
        Suite::Lyapunov => {
            let p = trend_test_problem(0.1)?;
            let reference = compute_reference_optimum(&p, 1e-12)?;
            let schedule = theoretical_schedule(&p, 1e-3)?;
            let trend = TrendOptions {
                seeds: 200,
                base_seed: seed.wrapping_add(400),
                horizon: 6_000,
                sample_every: 100,
                v: 1e-3,
                window: None,
                start: TrendStart::Origin,
            };
            out.push(lyapunov_trend_check(&p, &reference.x_star, &schedule, &trend, exec)?.check);
        }
        Suite::Floor => {
            let p = trend_test_problem(0.0)?;
            let x_star = DenseVector::new(p.unregularized_minimizer().into_vec())?;
            let floor = FloorOptions {
                seeds: 200,
                base_seed: seed.wrapping_add(500),
                burn_in: 2_000,
                window: 4_000,
                sample_every: 50,
            };
            out.push(floor_scaling_check(&p, &x_star, 1e-2, &floor, exec)?.0);
        }
        Suite::All => unreachable!("expanded above"),
    }
    Ok(out)
}
