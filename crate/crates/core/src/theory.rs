//! Theoretical parameter schedule, the Lyapunov potential, and Monte Carlo
//! validators for the estimator and Gaussian-moment bounds.
//!
//! Monte Carlo draws are split into fixed-size chunks. Chunk `c` draws from
//! its own stream `(seed, c)`, and chunk statistics are merged in chunk order,
//! so every report is identical under sequential and parallel execution.

use serde::{Deserialize, Serialize};

use crate::algorithms::{Optimizer, Refresh, Zpdvr, ZpdvrConfig};
use crate::error::{Error, Result};
use crate::estimators::{
    batched_dir_estimate, dir_estimate_component, dir_estimate_full, SmoothingConfig,
};
use crate::learner::GradientLearner;
use crate::linalg::{dot, DenseVector};
use crate::objective::{CompositeProblem, SzoCounter};
use crate::par::Exec;
use crate::rng::{gaussian_vector, SeededRng};

const CHUNK: usize = 4096;
/// Smallest sample count accepted by the Monte Carlo checks.
pub const MIN_SAMPLES: usize = 100_000;

/// Step size, potential weights, refresh probability, rate and noise floor
/// implied by the convergence theory for a given problem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheorySchedule {
    pub eta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub p: f64,
    pub theta: f64,
    pub delta_floor: f64,
    pub sigma: f64,
    /// `max{1 − 1/(κ(80d+126)), 1 − 1/(4n(d+2))}`
    pub contraction: f64,
}

/// Closed-form schedule from `L`, `μ`, `n`, `d` and the smoothing `v`.
pub fn schedule_from_constants(
    l: f64,
    mu: f64,
    n: usize,
    d: usize,
    v: f64,
) -> Result<TheorySchedule> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::NotStronglyConvex(mu));
    }
    if !(l >= mu) || !l.is_finite() {
        return Err(Error::InvalidInput(format!(
            "smoothness {l} must be at least mu = {mu}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidInput("need at least one component".into()));
    }
    if d == 0 {
        return Err(Error::InvalidDimension(0));
    }
    crate::estimators::check_smoothing(v)?;
    let (nf, df) = (n as f64, d as f64);
    let kappa = l / mu;
    let eta = 1.0 / ((40.0 * df + 63.0) * l);
    let a = kappa * (80.0 * df + 126.0);
    let b = 4.0 * nf * (df + 2.0);
    let v2 = v * v;
    Ok(TheorySchedule {
        eta,
        alpha: 8.0 * nf * (df + 2.0) * (2.0 * df + 3.0) * eta * eta,
        beta: 8.0 * nf * (2.0 * df + 3.0) * eta * eta,
        p: 1.0 / nf,
        theta: 1.0 / (a + b),
        delta_floor: 2.0 * (df + 3.0).powi(3) * v2 * kappa / (40.0 * df + 63.0)
            + 8.0 * (5.0 * df + 8.0) * (df + 6.0).powi(3) * v2 / (40.0 * df + 63.0).powi(2),
        sigma: (a / kappa + b) * kappa * (kappa + 1.0) * (df + 6.0).powi(2) * v2,
        contraction: (1.0 - 1.0 / a).max(1.0 - 1.0 / b),
    })
}

pub fn theoretical_schedule(problem: &dyn CompositeProblem, v: f64) -> Result<TheorySchedule> {
    schedule_from_constants(
        problem.smoothness(),
        problem.strong_convexity(),
        problem.num_components(),
        problem.dim(),
        v,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSnapshot {
    pub term_x: f64,
    pub term_h: f64,
    pub term_w: f64,
    pub psi: f64,
}

/// `∇f_i(x)` for every component.
pub fn component_gradients(problem: &dyn CompositeProblem, x: &[f64]) -> Result<Vec<DenseVector>> {
    (0..problem.num_components())
        .map(|i| problem.component_grad(i, x))
        .collect()
}

/// `Ψ = ‖x − x*‖² + α‖h̃ − ∇f(x*)‖² + (β/n) Σ ‖∇f_i(w) − ∇f_i(x*)‖²`.
pub fn lyapunov(
    problem: &dyn CompositeProblem,
    x: &[f64],
    h_tilde: &[f64],
    w: &[f64],
    x_star: &[f64],
    grad_star_components: &[DenseVector],
    schedule: &TheorySchedule,
) -> Result<LyapunovSnapshot> {
    let n = problem.num_components();
    if grad_star_components.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: grad_star_components.len(),
        });
    }
    for v in [x, h_tilde, w, x_star] {
        problem.check_dim(v)?;
    }
    let d = problem.dim();
    let mut grad_star = vec![0.0; d];
    for g in grad_star_components {
        problem.check_dim(g)?;
        crate::linalg::axpy(1.0, g, &mut grad_star);
    }
    grad_star.iter_mut().for_each(|g| *g /= n as f64);

    let sq = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>();
    let term_x = sq(x, x_star);
    let term_h = schedule.alpha * sq(h_tilde, &grad_star);
    let mut w_sum = 0.0;
    for (i, gs) in grad_star_components.iter().enumerate() {
        w_sum += sq(&problem.component_grad(i, w)?, gs);
    }
    let term_w = schedule.beta / n as f64 * w_sum;
    Ok(LyapunovSnapshot {
        term_x,
        term_h,
        term_w,
        psi: term_x + term_h + term_w,
    })
}

/// Outcome of one validator. `statistic` must lie in `[lower, bound]`
/// widened by `slack`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub params: String,
    pub statistic: f64,
    pub lower: Option<f64>,
    pub bound: f64,
    pub stderr: f64,
    /// Allowed excess beyond the bounds, usually `3·stderr`.
    pub slack: f64,
    pub samples: usize,
    pub passed: bool,
}

impl CheckReport {
    #[allow(clippy::too_many_arguments)]
    fn new(
        name: &str,
        params: String,
        statistic: f64,
        lower: Option<f64>,
        bound: f64,
        stderr: f64,
        slack: f64,
        samples: usize,
    ) -> Self {
        let passed = statistic.is_finite()
            && statistic <= bound + slack
            && lower.map_or(true, |lo| statistic >= lo - slack);
        CheckReport {
            name: name.to_string(),
            params,
            statistic,
            lower,
            bound,
            stderr,
            slack,
            samples,
            passed,
        }
    }
}

/// Per-coordinate mean and variance of a vector-valued random draw.
#[derive(Clone, Debug)]
struct Moments {
    count: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn new(dim: usize) -> Self {
        Moments {
            count: 0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
        }
    }

    fn push(&mut self, x: &[f64]) {
        self.count += 1;
        let k = self.count as f64;
        for ((m, s), &v) in self.mean.iter_mut().zip(&mut self.m2).zip(x) {
            let delta = v - *m;
            *m += delta / k;
            *s += delta * (v - *m);
        }
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let total = na + nb;
        for j in 0..self.mean.len() {
            let delta = other.mean[j] - self.mean[j];
            self.mean[j] += delta * nb / total;
            self.m2[j] += other.m2[j] + delta * delta * na * nb / total;
        }
        self.count += other.count;
    }

    fn variance(&self, j: usize) -> f64 {
        self.m2[j] / (self.count.max(2) - 1) as f64
    }

    /// Standard error of coordinate `j`'s mean.
    fn stderr(&self, j: usize) -> f64 {
        (self.variance(j) / self.count as f64).sqrt()
    }

    /// Root-mean-square size of `‖mean − E‖` under zero bias.
    fn stderr_norm(&self) -> f64 {
        let total: f64 = (0..self.mean.len()).map(|j| self.variance(j)).sum();
        (total / self.count as f64).sqrt()
    }
}

/// Runs `draw` `samples` times in deterministic chunks and merges the
/// statistics in chunk order.
fn monte_carlo<F>(samples: usize, dim: usize, seed: u64, exec: Exec, draw: F) -> Result<Moments>
where
    F: Fn(&mut SeededRng, &mut [f64]) -> Result<()> + Sync + Send,
{
    let chunks = samples.div_ceil(CHUNK);
    let parts = exec.map(chunks, |c| -> Result<Moments> {
        let mut rng = SeededRng::with_stream(seed, c as u64);
        let len = CHUNK.min(samples - c * CHUNK);
        let mut m = Moments::new(dim);
        let mut buf = vec![0.0; dim];
        for _ in 0..len {
            draw(&mut rng, &mut buf)?;
            m.push(&buf);
        }
        Ok(m)
    });
    let mut total = Moments::new(dim);
    for part in parts {
        total.merge(&part?);
    }
    Ok(total)
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidInput(format!(
            "Monte Carlo checks need at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    Ok(())
}

fn norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
}

/// `E‖u‖^q` against `d^{q/2}` (upper for `q ≤ 2`) and
/// `[d^{q/2}, (q+d)^{q/2}]` (for `q ≥ 2`), with a `3·stderr` band.
pub fn mc_moment_check(
    d: usize,
    q: f64,
    samples: usize,
    seed: u64,
    exec: Exec,
) -> Result<CheckReport> {
    check_samples(samples)?;
    if d == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if !(q >= 0.0) || !q.is_finite() {
        return Err(Error::InvalidInput(format!(
            "moment order must be >= 0, got {q}"
        )));
    }
    let m = monte_carlo(samples, 1, seed, exec, |rng, out| {
        let u = gaussian_vector(rng, d)?;
        out[0] = u.norm_sq().powf(q / 2.0);
        Ok(())
    })?;
    let df = d as f64;
    let lower = (q >= 2.0).then(|| df.powf(q / 2.0));
    let bound = if q <= 2.0 {
        df.powf(q / 2.0)
    } else {
        (q + df).powf(q / 2.0)
    };
    let se = m.stderr(0);
    Ok(CheckReport::new(
        "moments",
        format!("d={d} q={q}"),
        m.mean[0],
        lower,
        bound,
        se,
        3.0 * se,
        samples,
    ))
}

/// `E‖u uᵀ a‖² = (d+2)‖a‖²`, accepted within 2% of the target.
pub fn mc_projection_identity(
    a: &[f64],
    samples: usize,
    seed: u64,
    exec: Exec,
) -> Result<CheckReport> {
    check_samples(samples)?;
    let d = a.len();
    if d == 0 {
        return Err(Error::InvalidDimension(0));
    }
    let norm_sq = dot(a, a);
    if !(norm_sq > 0.0) || !norm_sq.is_finite() {
        return Err(Error::InvalidInput(
            "projection vector must be nonzero and finite".into(),
        ));
    }
    let m = monte_carlo(samples, 1, seed, exec, |rng, out| {
        let u = gaussian_vector(rng, d)?;
        let s = u.dot(a);
        out[0] = s * s * u.norm_sq();
        Ok(())
    })?;
    let target = (d as f64 + 2.0) * norm_sq;
    Ok(CheckReport::new(
        "projection",
        format!("d={d} |a|^2={norm_sq}"),
        m.mean[0],
        Some(target),
        target,
        m.stderr(0),
        0.02 * target,
        samples,
    ))
}

/// Bias of the single-component estimate (`component = Some(i)`) or the
/// full estimate (`None`) at `x`: `‖mean ∇̂ − ∇‖ ≤ (Lv/2)(d+3)^{3/2} + 3·stderr`.
pub fn mc_estimator_bias_check(
    problem: &dyn CompositeProblem,
    component: Option<usize>,
    x: &[f64],
    v: f64,
    samples: usize,
    seed: u64,
    exec: Exec,
) -> Result<CheckReport> {
    check_samples(samples)?;
    problem.check_dim(x)?;
    crate::estimators::check_smoothing(v)?;
    let d = problem.dim();
    let truth = match component {
        Some(i) => problem.component_grad(i, x)?,
        None => problem.full_gradient(x)?,
    };
    let scratch = SzoCounter::new();
    let m = monte_carlo(samples, d, seed, exec, |rng, out| {
        let u = gaussian_vector(rng, d)?;
        let est = match component {
            Some(i) => dir_estimate_component(problem, i, x, &u, v, &scratch)?,
            None => dir_estimate_full(problem, x, &u, v, &scratch)?,
        };
        out.copy_from_slice(&est);
        Ok(())
    })?;
    let bias = norm_diff(&m.mean, &truth);
    let bound = 0.5 * problem.smoothness() * v * (d as f64 + 3.0).powf(1.5);
    let se = m.stderr_norm();
    let which = component.map_or("full".to_string(), |i| format!("i={i}"));
    Ok(CheckReport::new(
        "estimator",
        format!("{which} d={d} v={v}"),
        bias,
        None,
        bound,
        se,
        3.0 * se,
        samples,
    ))
}

/// `E‖∇̂f(x,u) − ∇f(x)‖² ≤ (L²v²/2)(d+6)³ + 2(d+1)‖∇f(x)‖²` with a
/// `3·stderr` band.
pub fn mc_second_moment_check(
    problem: &dyn CompositeProblem,
    x: &[f64],
    v: f64,
    samples: usize,
    seed: u64,
    exec: Exec,
) -> Result<CheckReport> {
    check_samples(samples)?;
    problem.check_dim(x)?;
    crate::estimators::check_smoothing(v)?;
    let d = problem.dim();
    let truth = problem.full_gradient(x)?;
    let scratch = SzoCounter::new();
    let m = monte_carlo(samples, 1, seed, exec, |rng, out| {
        let u = gaussian_vector(rng, d)?;
        let est = dir_estimate_full(problem, x, &u, v, &scratch)?;
        out[0] = est.dist_sq(&truth);
        Ok(())
    })?;
    let l = problem.smoothness();
    let df = d as f64;
    let bound = 0.5 * l * l * v * v * (df + 6.0).powi(3) + 2.0 * (df + 1.0) * truth.norm_sq();
    let se = m.stderr(0);
    Ok(CheckReport::new(
        "second_moment",
        format!("d={d} v={v}"),
        m.mean[0],
        None,
        bound,
        se,
        3.0 * se,
        samples,
    ))
}

/// Bias of the ZPDVR gradient `g_k` at fixed `(x, w, h̃)`, averaged over the
/// fresh reference direction, the sampled components and the step
/// directions: `‖mean g_k − ∇f(x)‖ ≤ Lv(d+3)^{3/2} + 3·stderr`.
#[allow(clippy::too_many_arguments)]
pub fn mc_gk_bias_check(
    problem: &dyn CompositeProblem,
    x: &[f64],
    w: &[f64],
    h_tilde: &[f64],
    cfg: &SmoothingConfig,
    samples: usize,
    seed: u64,
    exec: Exec,
) -> Result<CheckReport> {
    check_samples(samples)?;
    cfg.validate()?;
    for p in [x, w, h_tilde] {
        problem.check_dim(p)?;
    }
    let (n, d) = (problem.num_components(), problem.dim());
    let truth = problem.full_gradient(x)?;
    let h = DenseVector::new(h_tilde.to_vec())?;
    let scratch = SzoCounter::new();
    let m = monte_carlo(samples, d, seed, exec, |rng, out| {
        let fresh = gaussian_vector(rng, d)?;
        let idx: Vec<usize> = (0..cfg.batch_samples).map(|_| rng.index(n)).collect();
        let dirs = (0..cfg.batch_dirs)
            .map(|_| gaussian_vector(rng, d))
            .collect::<Result<Vec<_>>>()?;
        let mut learner = GradientLearner::with_estimate(h.clone());
        let reference = learner.reference_gradient(problem, w, fresh, cfg.v, &scratch)?;
        let at_x = batched_dir_estimate(problem, &idx, x, &dirs, cfg.v, &scratch)?;
        let at_w = batched_dir_estimate(problem, &idx, w, &dirs, cfg.v, &scratch)?;
        for j in 0..d {
            out[j] = at_x[j] - at_w[j] + reference[j];
        }
        Ok(())
    })?;
    let bias = norm_diff(&m.mean, &truth);
    let bound = problem.smoothness() * cfg.v * (d as f64 + 3.0).powf(1.5);
    let se = m.stderr_norm();
    Ok(CheckReport::new(
        "gk",
        format!("d={d} v={}", cfg.v),
        bias,
        None,
        bound,
        se,
        3.0 * se,
        samples,
    ))
}

/// Where the trend and floor runs start.
#[derive(Clone, Debug, PartialEq)]
pub enum TrendStart {
    /// `x₀ = 0`, `h̃₀ = 0`.
    Origin,
    /// `x₀ = w₀ = x*`, `h̃₀ = ∇f(x*)`: the stationary point of the iteration.
    Optimum,
    /// Given `x₀`, `h̃₀ = 0`.
    Point(DenseVector),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrendOptions {
    pub seeds: usize,
    pub base_seed: u64,
    pub horizon: u64,
    pub sample_every: u64,
    pub v: f64,
    /// Window length `T` of the contraction test; `None` uses `⌈1/θ⌉`
    /// rounded up to a multiple of `sample_every`.
    pub window: Option<u64>,
    pub start: TrendStart,
}

/// Seed-averaged Lyapunov trajectory of ZPDVR under the theoretical schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendReport {
    pub check: CheckReport,
    pub schedule: TheorySchedule,
    pub window: u64,
    pub iterations: Vec<u64>,
    pub psi_mean: Vec<f64>,
    pub psi_stderr: Vec<f64>,
}

/// Optimum-side quantities the potential needs, computed once.
struct Anchor {
    x_star: Vec<f64>,
    grad_star: DenseVector,
    grad_star_components: Vec<DenseVector>,
}

impl Anchor {
    fn new(problem: &dyn CompositeProblem, x_star: &[f64]) -> Result<Self> {
        problem.check_dim(x_star)?;
        Ok(Anchor {
            x_star: x_star.to_vec(),
            grad_star: problem.full_gradient(x_star)?,
            grad_star_components: component_gradients(problem, x_star)?,
        })
    }
}

/// Runs one seeded ZPDVR trajectory and returns `Ψ` at every `sample_every`
/// iterations, starting with iteration 0.
#[allow(clippy::too_many_arguments)]
fn psi_trajectory(
    problem: &dyn CompositeProblem,
    anchor: &Anchor,
    schedule: &TheorySchedule,
    v: f64,
    start: &TrendStart,
    seed: u64,
    horizon: u64,
    sample_every: u64,
) -> Result<Vec<f64>> {
    let d = problem.dim();
    let (x0, learner) = match start {
        TrendStart::Origin => (DenseVector::zeros(d), GradientLearner::new(d)),
        TrendStart::Optimum => (
            DenseVector::new(anchor.x_star.clone())?,
            GradientLearner::with_estimate(anchor.grad_star.clone()),
        ),
        TrendStart::Point(x) => (x.clone(), GradientLearner::new(d)),
    };
    let cfg = ZpdvrConfig {
        eta: schedule.eta,
        refresh: Refresh::Bernoulli { p: schedule.p },
        smoothing: SmoothingConfig::with_v(v),
    };
    let mut opt = Zpdvr::with_learner(problem, x0, learner, cfg, seed)?;
    let counter = SzoCounter::new();
    let psi = |opt: &Zpdvr| -> Result<f64> {
        Ok(lyapunov(
            problem,
            opt.iterate(),
            opt.learner().estimate(),
            opt.reference_point(),
            &anchor.x_star,
            &anchor.grad_star_components,
            schedule,
        )?
        .psi)
    };
    let mut out = vec![psi(&opt)?];
    for k in 1..=horizon {
        opt.step(problem, &counter, u64::MAX)?;
        if k % sample_every == 0 {
            out.push(psi(&opt)?);
        }
    }
    Ok(out)
}

fn seed_average(trajectories: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let len = trajectories.iter().map(Vec::len).min().unwrap_or(0);
    let s = trajectories.len() as f64;
    let mut mean = vec![0.0; len];
    let mut se = vec![0.0; len];
    for k in 0..len {
        let m = trajectories.iter().map(|t| t[k]).sum::<f64>() / s;
        let var = trajectories.iter().map(|t| (t[k] - m).powi(2)).sum::<f64>() / (s - 1.0).max(1.0);
        mean[k] = m;
        se[k] = (var / s).sqrt();
    }
    (mean, se)
}

/// Checks that the seed-averaged potential contracts at least at the
/// theoretical rate. For every sample `k` with `Ψ̄_k > 10·δ` and `k + T`
/// inside the horizon, `Ψ̄_{k+T} ≤ 1.5 ρ^T Ψ̄_k` must hold; from a generic
/// start `Ψ̄` must also halve over the horizon. The statistic is the worst
/// ratio `Ψ̄_{k+T} / (ρ^T Ψ̄_k)` (bound 1.5).
pub fn lyapunov_trend_check(
    problem: &dyn CompositeProblem,
    x_star: &[f64],
    schedule: &TheorySchedule,
    opts: &TrendOptions,
    exec: Exec,
) -> Result<TrendReport> {
    if opts.seeds < 2 {
        return Err(Error::InvalidInput(
            "trend check needs at least two seeds".into(),
        ));
    }
    let every = opts.sample_every.max(1);
    let anchor = Anchor::new(problem, x_star)?;
    let trajectories = exec
        .map(opts.seeds, |s| {
            psi_trajectory(
                problem,
                &anchor,
                schedule,
                opts.v,
                &opts.start,
                opts.base_seed.wrapping_add(s as u64),
                opts.horizon,
                every,
            )
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let (psi_mean, psi_stderr) = seed_average(&trajectories);
    let iterations: Vec<u64> = (0..psi_mean.len() as u64).map(|k| k * every).collect();

    let window = opts
        .window
        .unwrap_or_else(|| (1.0 / schedule.theta).ceil() as u64)
        .div_ceil(every)
        .max(1)
        * every;
    let lag = (window / every) as usize;
    let rho_t = schedule.contraction.powf(window as f64);
    let mut worst: f64 = 0.0;
    let mut windows = 0;
    for k in 0..psi_mean.len().saturating_sub(lag) {
        if psi_mean[k] > 10.0 * schedule.delta_floor {
            worst = worst.max(psi_mean[k + lag] / (rho_t * psi_mean[k]));
            windows += 1;
        }
    }
    let first = psi_mean.first().copied().unwrap_or(0.0);
    let last = psi_mean.last().copied().unwrap_or(0.0);
    let halved = matches!(opts.start, TrendStart::Optimum) || last < 0.5 * first;
    let mut check = CheckReport::new(
        "lyapunov",
        format!(
            "seeds={} horizon={} window={window} windows={windows} psi0={first:e} psiH={last:e}",
            opts.seeds, opts.horizon
        ),
        worst,
        None,
        1.5,
        0.0,
        0.0,
        opts.seeds,
    );
    check.passed &= halved;
    Ok(TrendReport {
        check,
        schedule: *schedule,
        window,
        iterations,
        psi_mean,
        psi_stderr,
    })
}

/// Seed- and time-averaged potential of ZPDVR started at the optimum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FloorMeasurement {
    pub v: f64,
    pub floor: f64,
    pub stderr: f64,
    pub seeds: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FloorOptions {
    pub seeds: usize,
    pub base_seed: u64,
    pub burn_in: u64,
    pub window: u64,
    pub sample_every: u64,
}

/// Runs ZPDVR under the theoretical schedule from the stationary point and
/// averages `Ψ` over the samples after `burn_in`, then over seeds.
pub fn smoothing_floor(
    problem: &dyn CompositeProblem,
    x_star: &[f64],
    v: f64,
    opts: &FloorOptions,
    exec: Exec,
) -> Result<FloorMeasurement> {
    if opts.seeds < 2 {
        return Err(Error::InvalidInput(
            "floor measurement needs at least two seeds".into(),
        ));
    }
    let every = opts.sample_every.max(1);
    let schedule = theoretical_schedule(problem, v)?;
    let anchor = Anchor::new(problem, x_star)?;
    let skip = (opts.burn_in / every) as usize + 1;
    let per_seed = exec
        .map(opts.seeds, |s| -> Result<f64> {
            let traj = psi_trajectory(
                problem,
                &anchor,
                &schedule,
                v,
                &TrendStart::Optimum,
                opts.base_seed.wrapping_add(s as u64),
                opts.burn_in + opts.window,
                every,
            )?;
            let tail = &traj[skip.min(traj.len() - 1)..];
            Ok(tail.iter().sum::<f64>() / tail.len() as f64)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let s = per_seed.len() as f64;
    let floor = per_seed.iter().sum::<f64>() / s;
    let var = per_seed.iter().map(|f| (f - floor).powi(2)).sum::<f64>() / (s - 1.0);
    Ok(FloorMeasurement {
        v,
        floor,
        stderr: (var / s).sqrt(),
        seeds: opts.seeds,
    })
}

/// Ratio of the floors at `v` and `v/2`, expected near 4 and accepted in
/// `[3, 5]`. Both measurements share seeds.
pub fn floor_scaling_check(
    problem: &dyn CompositeProblem,
    x_star: &[f64],
    v: f64,
    opts: &FloorOptions,
    exec: Exec,
) -> Result<(CheckReport, FloorMeasurement, FloorMeasurement)> {
    let full = smoothing_floor(problem, x_star, v, opts, exec)?;
    let half = smoothing_floor(problem, x_star, v / 2.0, opts, exec)?;
    let ratio = full.floor / half.floor;
    let rel = ((full.stderr / full.floor).powi(2) + (half.stderr / half.floor).powi(2)).sqrt();
    let report = CheckReport::new(
        "floor",
        format!(
            "v={v} floor(v)={:e} floor(v/2)={:e}",
            full.floor, half.floor
        ),
        ratio,
        Some(3.0),
        5.0,
        ratio * rel,
        0.0,
        opts.seeds,
    );
    Ok((report, full, half))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::make_quadratic_lasso;
    use crate::objective::{LinearProblem, QuadraticLassoProblem};

    #[test]
    fn schedule_examples() {
        let s = schedule_from_constants(2.0, 1.0, 10, 123, 1e-3).unwrap();
        assert_eq!(s.eta, 1.0 / (4983.0 * 2.0));
        let s = schedule_from_constants(10.0, 1.0, 100, 20, 1e-3).unwrap();
        assert!((s.theta - 1.0 / 26060.0).abs() < 1e-18);
        assert!(s.theta < 1.0 && s.eta <= 1.0 / 10.0);
        assert!(matches!(
            schedule_from_constants(1.0, 0.0, 10, 2, 1e-3),
            Err(Error::NotStronglyConvex(_))
        ));
    }

    #[test]
    fn lyapunov_terms() {
        let p = make_quadratic_lasso(6, 3, 4.0, 0.1, 1).unwrap();
        let xs = vec![0.2, -0.1, 0.4];
        let gsc = component_gradients(&p, &xs).unwrap();
        let gs = p.full_gradient(&xs).unwrap();
        let s = theoretical_schedule(&p, 1e-3).unwrap();
        let z = lyapunov(&p, &xs, &gs, &xs, &xs, &gsc, &s).unwrap();
        assert_eq!(z.psi, 0.0);
        let mut h = gs.clone();
        h.as_mut_slice()[0] += 1.0;
        let a = lyapunov(&p, &xs, &h, &xs, &xs, &gsc, &s).unwrap();
        assert!((a.psi - s.alpha).abs() <= 1e-15 * s.alpha);
    }

    #[test]
    fn linear_problem_estimates_are_unbiased() {
        let p = LinearProblem::new(vec![vec![1.0, -2.0, 0.5]], 0.0).unwrap();
        let r = mc_estimator_bias_check(&p, Some(0), &[0.0; 3], 1e-3, 100_000, 1, Exec::default())
            .unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.bound, 0.0);
    }

    #[test]
    fn projection_targets() {
        let r = mc_projection_identity(&[1.0, 0.0, 0.0], 100_000, 4, Exec::default()).unwrap();
        assert_eq!(r.bound, 5.0);
        assert!(r.passed, "{r:?}");
        assert!(mc_projection_identity(&[0.0, 0.0], 100_000, 4, Exec::default()).is_err());
        assert!(mc_moment_check(2, 2.0, 10, 0, Exec::default()).is_err());
    }

    #[test]
    fn monte_carlo_is_policy_independent() {
        let a = mc_moment_check(5, 4.0, 100_000, 9, Exec::Sequential).unwrap();
        let b = mc_moment_check(5, 4.0, 100_000, 9, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn optimum_start_stays_near_zero() {
        let p = QuadraticLassoProblem::new(
            vec![vec![1.0, 0.5], vec![0.5, 1.0]],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            0.0,
        )
        .unwrap();
        let xs = p.unregularized_minimizer();
        let s = theoretical_schedule(&p, 1e-3).unwrap();
        let opts = TrendOptions {
            seeds: 4,
            base_seed: 0,
            horizon: 200,
            sample_every: 50,
            v: 1e-3,
            window: None,
            start: TrendStart::Optimum,
        };
        let r = lyapunov_trend_check(&p, &xs, &s, &opts, Exec::default()).unwrap();
        assert_eq!(r.psi_mean[0], 0.0);
        assert!(r.psi_mean.iter().all(|&v| v <= s.delta_floor));
    }
}
