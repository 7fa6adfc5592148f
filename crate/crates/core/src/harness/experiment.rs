//! Comparison runs and grid searches with CSV histories and a JSON summary.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algorithms::{run, AlgorithmSpec, RunHistory, RunOptions, Sample, StopReason};
use crate::error::{Error, Result};
use crate::linalg::DenseVector;
use crate::objective::CompositeProblem;

use super::config::ExperimentConfig;
use super::reference::{compute_reference_optimum, ReferenceOptimum};

pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Run,
    Grid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemInfo {
    pub n: usize,
    pub d: usize,
    pub smoothness: f64,
    pub strong_convexity: f64,
    pub lambda1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceInfo {
    pub f_star: f64,
    pub tol: f64,
    pub iterations: usize,
}

/// One `(candidate, seed)` run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub algorithm: String,
    pub candidate: usize,
    pub params: AlgorithmSpec,
    pub seed: u64,
    /// File name inside the output directory; absent when the cell failed.
    pub csv: Option<String>,
    pub final_iter: Option<u64>,
    pub final_szo: Option<u64>,
    pub final_residual: Option<f64>,
    pub stop: Option<StopReason>,
    /// Residual at each budget checkpoint.
    pub checkpoints: Vec<Option<f64>>,
    pub wall_ms: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardEntry {
    pub rank: usize,
    pub algorithm: String,
    pub candidate: usize,
    pub params: AlgorithmSpec,
    /// Mean final residual over seeds; absent if any seed failed.
    pub score: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub mode: Mode,
    pub code_version: String,
    pub config: ExperimentConfig,
    pub config_sha256: String,
    pub problem: ProblemInfo,
    pub reference: ReferenceInfo,
    pub budget: u64,
    pub checkpoint_szo: Vec<u64>,
    pub cells: Vec<CellSummary>,
    pub leaderboard: Vec<LeaderboardEntry>,
    /// Best candidate per algorithm, in config order.
    pub winners: Vec<LeaderboardEntry>,
    pub wall_time_s: f64,
}

impl ExperimentReport {
    pub fn winner(&self, algorithm: &str) -> Option<&LeaderboardEntry> {
        self.winners.iter().find(|w| w.algorithm == algorithm)
    }

    pub fn failed_cells(&self) -> usize {
        self.cells.iter().filter(|c| c.error.is_some()).count()
    }
}

/// Builds `spec` at the origin and runs it under `opts`.
pub fn run_cell(
    problem: &dyn CompositeProblem,
    spec: &AlgorithmSpec,
    seed: u64,
    opts: &RunOptions,
    reference: &ReferenceOptimum,
) -> Result<RunHistory> {
    let mut opt = spec.build(problem, DenseVector::zeros(problem.dim()), seed)?;
    run(opt.as_mut(), problem, opts, reference)
}

/// Writes `iter,szo,objective,residual` rows.
pub fn write_history_csv(path: &Path, samples: &[Sample]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for s in samples {
        w.serialize(s)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_history_csv(path: &Path) -> Result<Vec<Sample>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

/// Every candidate and seed of a singleton-grid config.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if !cfg.is_singleton() {
        return Err(Error::Config(
            "hyperparameter lists need the grid search mode".into(),
        ));
    }
    execute(cfg, Mode::Run)
}

/// Every grid point and seed, ranked by mean final residual.
pub fn grid_search(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    execute(cfg, Mode::Grid)
}

fn execute(cfg: &ExperimentConfig, mode: Mode) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = Instant::now();
    let problem = cfg.problem.build()?;
    let problem = problem.as_ref();
    let (n, d) = (problem.num_components(), problem.dim());
    let candidates = cfg.candidates(n)?;
    if candidates.is_empty() {
        return Err(Error::Config("empty grid".into()));
    }
    let reference = compute_reference_optimum(problem, cfg.ref_tol)?;
    let budget = cfg.resolved_budget(n, d);
    let checkpoint_szo: Vec<u64> = cfg
        .checkpoint_fractions()
        .iter()
        .map(|f| (f * budget as f64).round() as u64)
        .collect();
    let opts = RunOptions {
        budget,
        sample_every: cfg.sample_every,
        target_residual: cfg.target_residual,
    };
    fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;

    let seeds = cfg.seed_list();
    let cells: Vec<(usize, u64)> = (0..candidates.len())
        .flat_map(|c| seeds.iter().map(move |&s| (c, s)))
        .collect();
    let summaries = cfg.exec.map_slice(&cells, |&(c, seed)| {
        let spec = &candidates[c];
        let file = format!("{}-c{c:03}-s{seed}.csv", spec.name());
        let path: PathBuf = cfg.out_dir.join(&file);
        let t0 = Instant::now();
        let outcome = run_cell(problem, spec, seed, &opts, &reference)
            .and_then(|h| write_history_csv(&path, &h.samples).map(|_| h));
        let mut cell = CellSummary {
            algorithm: spec.name().to_string(),
            candidate: c,
            params: spec.clone(),
            seed,
            csv: None,
            final_iter: None,
            final_szo: None,
            final_residual: None,
            stop: None,
            checkpoints: vec![None; checkpoint_szo.len()],
            wall_ms: 0.0,
            error: None,
        };
        match outcome {
            Ok(h) => {
                let last = *h.last();
                cell.csv = Some(file);
                cell.final_iter = Some(last.iter);
                cell.final_szo = Some(last.szo);
                cell.final_residual = Some(last.residual);
                cell.stop = Some(h.stop);
                cell.checkpoints = checkpoint_szo.iter().map(|&b| h.residual_at(b)).collect();
            }
            Err(e) => cell.error = Some(e.to_string()),
        }
        cell.wall_ms = t0.elapsed().as_secs_f64() * 1e3;
        cell
    });

    let leaderboard = rank(&candidates, &summaries);
    let mut winners: Vec<LeaderboardEntry> = Vec::new();
    for entry in &leaderboard {
        if !winners.iter().any(|w| w.algorithm == entry.algorithm) {
            winners.push(entry.clone());
        }
    }
    winners.sort_by_key(|w| {
        candidates
            .iter()
            .position(|c| c.name() == w.algorithm)
            .unwrap_or(usize::MAX)
    });

    let config_toml = cfg.to_toml();
    let report = ExperimentReport {
        mode,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        config_sha256: hex::encode(Sha256::digest(config_toml.as_bytes())),
        problem: ProblemInfo {
            n,
            d,
            smoothness: problem.smoothness(),
            strong_convexity: problem.strong_convexity(),
            lambda1: problem.l1_weight(),
        },
        reference: ReferenceInfo {
            f_star: reference.f_star,
            tol: reference.tol,
            iterations: reference.iterations,
        },
        budget,
        checkpoint_szo,
        cells: summaries,
        leaderboard,
        winners,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    let path = cfg.out_dir.join(SUMMARY_FILE);
    let json = serde_json::to_string_pretty(&report)?;
    fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    Ok(report)
}

/// Candidates sorted by mean final residual; failed candidates last, ties
/// in config order.
fn rank(candidates: &[AlgorithmSpec], cells: &[CellSummary]) -> Vec<LeaderboardEntry> {
    let mut entries: Vec<LeaderboardEntry> = candidates
        .iter()
        .enumerate()
        .map(|(c, spec)| {
            let mine: Vec<&CellSummary> = cells.iter().filter(|x| x.candidate == c).collect();
            let residuals: Option<Vec<f64>> = mine.iter().map(|x| x.final_residual).collect();
            let score = residuals
                .filter(|r| !r.is_empty())
                .map(|r| r.iter().sum::<f64>() / r.len() as f64)
                .filter(|s| s.is_finite());
            LeaderboardEntry {
                rank: 0,
                algorithm: spec.name().to_string(),
                candidate: c,
                params: spec.clone(),
                score,
            }
        })
        .collect();
    entries.sort_by(|a, b| match (a.score, b.score) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    for (i, e) in entries.iter_mut().enumerate() {
        e.rank = i + 1;
    }
    entries
}

/// Human-readable digest of a summary file.
pub fn summarize(path: &Path) -> Result<String> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let report: ExperimentReport = serde_json::from_str(&text)?;
    Ok(render(&report))
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.3e}"))
}

pub fn render(report: &ExperimentReport) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let p = &report.problem;
    let _ = writeln!(
        out,
        "problem n={} d={} L={:.4e} mu={:.4e} lambda1={:e}",
        p.n, p.d, p.smoothness, p.strong_convexity, p.lambda1
    );
    let _ = writeln!(
        out,
        "F*={:.12e} budget={} ({:.2} n*d) cells={} failed={} wall={:.1}s",
        report.reference.f_star,
        report.budget,
        report.budget as f64 / (p.n as f64 * p.d as f64),
        report.cells.len(),
        report.failed_cells(),
        report.wall_time_s
    );
    let _ = writeln!(
        out,
        "\n{:<8} {:>5} {:>6} {:>12} {:>12}  status",
        "algo", "cand", "seed", "szo", "residual"
    );
    for c in &report.cells {
        let status = c.error.as_deref().unwrap_or("ok");
        let _ = writeln!(
            out,
            "{:<8} {:>5} {:>6} {:>12} {:>12}  {}",
            c.algorithm,
            c.candidate,
            c.seed,
            c.final_szo.map_or("-".into(), |s| s.to_string()),
            fmt_opt(c.final_residual),
            status
        );
    }
    let _ = writeln!(out, "\nwinners");
    for w in &report.winners {
        let _ = writeln!(
            out,
            "{:<8} {:>12}  {}",
            w.algorithm,
            fmt_opt(w.score),
            serde_json::to_string(&w.params).unwrap_or_default()
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(dir: &Path, algs: &str) -> ExperimentConfig {
        let text = format!(
            r#"
            budget = 2000
            sample_every = 10
            seeds = [1, 2]
            out_dir = "{}"
            [problem]
            kind = "quadratic"
            n = 8
            d = 3
            kappa = 4
            lambda1 = 0.05
            {algs}
            "#,
            dir.display()
        );
        ExperimentConfig::from_toml(&text).unwrap()
    }

    #[test]
    fn run_writes_csvs_and_summary() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(
            dir.path(),
            "[[algorithms]]\nname = \"zpdvr\"\neta = 0.05\n[[algorithms]]\nname = \"pgd\"\neta = 0.5\n",
        );
        let report = run_experiment(&cfg).unwrap();
        assert_eq!(report.cells.len(), 4);
        for c in &report.cells {
            let rows = read_history_csv(&dir.path().join(c.csv.as_ref().unwrap())).unwrap();
            assert!(rows.windows(2).all(|w| w[0].szo <= w[1].szo));
            assert!(c.final_szo.unwrap() <= 2000);
        }
        let header = fs::read_to_string(dir.path().join("zpdvr-c000-s1.csv")).unwrap();
        assert!(header.starts_with("iter,szo,objective,residual\n"));
        assert!(summarize(&dir.path().join(SUMMARY_FILE))
            .unwrap()
            .contains("winners"));
    }

    #[test]
    fn grids_need_grid_mode_and_rank_ascending() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(
            dir.path(),
            "[[algorithms]]\nname = \"pgd\"\neta = [0.01, 0.5, 0.1]\n",
        );
        assert!(matches!(run_experiment(&cfg), Err(Error::Config(_))));
        let report = grid_search(&cfg).unwrap();
        let scores: Vec<f64> = report
            .leaderboard
            .iter()
            .map(|e| e.score.unwrap())
            .collect();
        assert!(scores.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(report.winner("pgd").unwrap().candidate, 1);
    }

    #[test]
    fn failed_candidates_rank_last_with_stable_ties() {
        let spec = |eta| AlgorithmSpec::Pgd(crate::algorithms::PgdConfig { eta, v: 1e-3 });
        let candidates = vec![spec(1.0), spec(2.0), spec(3.0), spec(4.0)];
        let cell = |c: usize, r: Option<f64>| CellSummary {
            algorithm: "pgd".into(),
            candidate: c,
            params: candidates[c].clone(),
            seed: 0,
            csv: r.map(|_| "x.csv".into()),
            final_iter: None,
            final_szo: None,
            final_residual: r,
            stop: None,
            checkpoints: vec![],
            wall_ms: 0.0,
            error: r.is_none().then(|| "diverged".into()),
        };
        let cells = vec![
            cell(0, None),
            cell(1, Some(0.5)),
            cell(2, Some(0.1)),
            cell(3, Some(0.5)),
        ];
        let order: Vec<usize> = rank(&candidates, &cells)
            .iter()
            .map(|e| e.candidate)
            .collect();
        assert_eq!(order, vec![2, 1, 3, 0]);
    }
}
