//! Experiment manifests.
//!
//! A manifest is a TOML file:
//!
//! ```toml
//! out_dir = "results/a9a"
//! seeds = [0, 1]
//! budget_nd = 30          # or `budget = 2e6` in oracle calls
//! sample_every = 200
//! v = 1e-3
//!
//! [problem]
//! kind = "libsvm"         # libsvm | quadratic | logistic_synthetic
//! path = "a9a"            # relative to the manifest
//! lambda1 = 1e-4
//! lambda2 = 1e-4
//!
//! [[algorithms]]
//! name = "zpdvr"
//! eta = [0.1, 0.5, 1]     # a scalar or a list; lists span a grid
//! p = [0.01, 0.02]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::algorithms::{AlgorithmSpec, PgdConfig, Refresh, SegaConfig, ZpdvrConfig, ZpsvrgConfig};
use crate::data::{make_logistic_dataset, make_quadratic_lasso, read_libsvm_file};
use crate::error::{Error, Result};
use crate::estimators::{SmoothingConfig, DEFAULT_SMOOTHING};
use crate::objective::CompositeProblem;
use crate::par::Exec;

use super::reference::DEFAULT_REFERENCE_TOL;

/// A scalar or a list of values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn values(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            OneOrMany::One(_) => 1,
            OneOrMany::Many(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    Libsvm {
        path: PathBuf,
        lambda1: f64,
        lambda2: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
        /// Per-feature max-abs scaling.
        #[serde(default)]
        scale: bool,
    },
    Quadratic {
        n: usize,
        d: usize,
        kappa: f64,
        lambda1: f64,
        #[serde(default)]
        seed: u64,
    },
    LogisticSynthetic {
        n: usize,
        d: usize,
        #[serde(default = "default_density")]
        density: f64,
        lambda1: f64,
        lambda2: f64,
        #[serde(default)]
        seed: u64,
    },
}

fn default_density() -> f64 {
    0.3
}

impl ProblemSpec {
    pub fn build(&self) -> Result<Box<dyn CompositeProblem>> {
        Ok(match self {
            ProblemSpec::Libsvm {
                path,
                lambda1,
                lambda2,
                dim,
                scale,
            } => {
                let mut ds = read_libsvm_file(path, *dim)?;
                if *scale {
                    ds.scale_max_abs();
                }
                Box::new(ds.to_problem(*lambda1, *lambda2)?)
            }
            ProblemSpec::Quadratic {
                n,
                d,
                kappa,
                lambda1,
                seed,
            } => Box::new(make_quadratic_lasso(*n, *d, *kappa, *lambda1, *seed)?),
            ProblemSpec::LogisticSynthetic {
                n,
                d,
                density,
                lambda1,
                lambda2,
                seed,
            } => Box::new(
                make_logistic_dataset(*n, *d, *density, *seed)?.to_problem(*lambda1, *lambda2)?,
            ),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmName {
    Zpdvr,
    Zpsvrg,
    Sega,
    Pgd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RefreshKind {
    Bernoulli,
    Periodic,
}

/// Hyperparameters of one algorithm; list-valued fields span a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmGrid {
    pub name: AlgorithmName,
    pub eta: OneOrMany<f64>,
    /// ZPDVR refresh probability; defaults to `1/n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<OneOrMany<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refresh: Option<RefreshKind>,
    /// Period of `refresh = "periodic"`; defaults to `⌈n / batch_samples⌉`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub every: Option<u64>,
    /// ZPSVRG inner-loop length.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<OneOrMany<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_dirs: Option<usize>,
}

impl AlgorithmGrid {
    fn check(&self) -> Result<()> {
        let name = format!("{:?}", self.name).to_lowercase();
        let bad = |what: &str| Err(Error::Config(format!("{name}: {what}")));
        if self.eta.is_empty() {
            return bad("empty eta grid");
        }
        let zpdvr = self.name == AlgorithmName::Zpdvr;
        if !zpdvr && (self.p.is_some() || self.refresh.is_some() || self.every.is_some()) {
            return bad("p/refresh/every only apply to zpdvr");
        }
        if self.p.as_ref().is_some_and(OneOrMany::is_empty) {
            return bad("empty p grid");
        }
        if self.refresh == Some(RefreshKind::Periodic) && self.p.is_some() {
            return bad("periodic refresh takes `every`, not `p`");
        }
        if self.every.is_some() && self.refresh != Some(RefreshKind::Periodic) {
            return bad("`every` requires refresh = \"periodic\"");
        }
        match (self.name, &self.m) {
            (AlgorithmName::Zpsvrg, None) => return bad("missing inner-loop length m"),
            (AlgorithmName::Zpsvrg, Some(m)) if m.is_empty() => return bad("empty m grid"),
            (AlgorithmName::Zpsvrg, _) => {}
            (_, Some(_)) => return bad("m only applies to zpsvrg"),
            _ => {}
        }
        if matches!(self.name, AlgorithmName::Pgd | AlgorithmName::Sega)
            && self.batch_samples.is_some()
        {
            return bad("batch_samples does not apply");
        }
        if self.name == AlgorithmName::Pgd && self.batch_dirs.is_some() {
            return bad("batch_dirs does not apply");
        }
        Ok(())
    }

    /// Number of grid points.
    pub fn size(&self) -> usize {
        self.eta.len()
            * self.p.as_ref().map_or(1, OneOrMany::len)
            * self.m.as_ref().map_or(1, OneOrMany::len)
    }

    /// Grid points in config order: `eta` outermost, then `p` or `m`.
    pub fn expand(&self, n: usize, default_v: f64) -> Result<Vec<AlgorithmSpec>> {
        self.check()?;
        let v = self.v.unwrap_or(default_v);
        let smoothing = SmoothingConfig {
            v,
            batch_dirs: self.batch_dirs.unwrap_or(1),
            batch_samples: self.batch_samples.unwrap_or(1),
        };
        let mut out = Vec::with_capacity(self.size());
        for eta in self.eta.values() {
            match self.name {
                AlgorithmName::Zpdvr => {
                    let refreshes = match self.refresh.unwrap_or(RefreshKind::Bernoulli) {
                        RefreshKind::Bernoulli => self
                            .p
                            .as_ref()
                            .map_or(vec![1.0 / n as f64], OneOrMany::values)
                            .into_iter()
                            .map(|p| Refresh::Bernoulli { p })
                            .collect(),
                        RefreshKind::Periodic => vec![Refresh::Periodic {
                            every: self
                                .every
                                .unwrap_or_else(|| n.div_ceil(smoothing.batch_samples) as u64),
                        }],
                    };
                    for refresh in refreshes {
                        out.push(AlgorithmSpec::Zpdvr(ZpdvrConfig {
                            eta,
                            refresh,
                            smoothing,
                        }));
                    }
                }
                AlgorithmName::Zpsvrg => {
                    for m in self.m.as_ref().map(OneOrMany::values).unwrap_or_default() {
                        out.push(AlgorithmSpec::Zpsvrg(ZpsvrgConfig { eta, m, smoothing }));
                    }
                }
                AlgorithmName::Sega => out.push(AlgorithmSpec::Sega(SegaConfig {
                    eta,
                    v,
                    batch_dirs: smoothing.batch_dirs,
                })),
                AlgorithmName::Pgd => out.push(AlgorithmSpec::Pgd(PgdConfig { eta, v })),
            }
        }
        Ok(out)
    }
}

fn default_sample_every() -> u64 {
    100
}

fn default_v() -> f64 {
    DEFAULT_SMOOTHING
}

fn default_seeds() -> OneOrMany<u64> {
    OneOrMany::One(0)
}

fn default_ref_tol() -> f64 {
    DEFAULT_REFERENCE_TOL
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub algorithms: Vec<AlgorithmGrid>,
    /// Oracle-call budget per run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<f64>,
    /// Budget in multiples of `n·d`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget_nd: Option<f64>,
    #[serde(default = "default_seeds")]
    pub seeds: OneOrMany<u64>,
    #[serde(default = "default_sample_every")]
    pub sample_every: u64,
    /// Default smoothing for every algorithm.
    #[serde(default = "default_v")]
    pub v: f64,
    #[serde(default = "default_ref_tol")]
    pub ref_tol: f64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Residual checkpoints as fractions of the budget.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<Vec<f64>>,
    /// Stop a run once its residual falls below this value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_residual: Option<f64>,
    #[serde(default)]
    pub exec: Exec,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a manifest; a relative dataset path is taken relative to the
    /// manifest's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: ExperimentConfig = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))?;
        if let ProblemSpec::Libsvm { path: data, .. } = &mut cfg.problem {
            if data.is_relative() {
                if let Some(dir) = path.parent() {
                    *data = dir.join(&*data);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs always serialize")
    }

    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(Error::Config("at least one algorithm is required".into()));
        }
        match (self.budget, self.budget_nd) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "give either budget or budget_nd, not both".into(),
                ))
            }
            (None, None) => return Err(Error::Config("missing budget or budget_nd".into())),
            (Some(b), None) | (None, Some(b)) if !(b >= 0.0) || !b.is_finite() => {
                return Err(Error::Config(format!(
                    "budget must be finite and >= 0, got {b}"
                )))
            }
            _ => {}
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if self.sample_every == 0 {
            return Err(Error::Config("sample_every must be >= 1".into()));
        }
        if !(self.v > 0.0) || !self.v.is_finite() {
            return Err(Error::Config(format!("v must be > 0, got {}", self.v)));
        }
        if !(self.ref_tol > 0.0) {
            return Err(Error::Config(format!(
                "ref_tol must be > 0, got {}",
                self.ref_tol
            )));
        }
        if let Some(cps) = &self.checkpoints {
            if cps.iter().any(|c| !(*c > 0.0 && *c <= 1.0)) {
                return Err(Error::Config("checkpoints are fractions in (0, 1]".into()));
            }
        }
        if let ProblemSpec::Libsvm { path, .. } = &self.problem {
            if !path.is_file() {
                return Err(Error::Config(format!(
                    "dataset {} does not exist",
                    path.display()
                )));
            }
        }
        for a in &self.algorithms {
            a.check()?;
        }
        Ok(())
    }

    /// Budget in oracle calls for a problem of size `n × d`.
    pub fn resolved_budget(&self, n: usize, d: usize) -> u64 {
        match (self.budget, self.budget_nd) {
            (Some(b), _) => b.round() as u64,
            (None, Some(k)) => (k * n as f64 * d as f64).round() as u64,
            (None, None) => 0,
        }
    }

    pub fn checkpoint_fractions(&self) -> Vec<f64> {
        self.checkpoints
            .clone()
            .unwrap_or_else(|| vec![0.25, 0.5, 0.75, 1.0])
    }

    pub fn seed_list(&self) -> Vec<u64> {
        self.seeds.values()
    }

    /// Every algorithm's grid points, in config order.
    pub fn candidates(&self, n: usize) -> Result<Vec<AlgorithmSpec>> {
        let mut out = Vec::new();
        for a in &self.algorithms {
            out.extend(a.expand(n, self.v)?);
        }
        Ok(out)
    }

    /// Whether every algorithm has exactly one grid point.
    pub fn is_singleton(&self) -> bool {
        self.algorithms.iter().all(|a| a.size() == 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
        budget = 1000
        [problem]
        kind = "quadratic"
        n = 10
        d = 3
        kappa = 5
        lambda1 = 0.1
    "#;

    fn with(algs: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::from_toml(&format!("{BASE}\n{algs}"))
    }

    #[test]
    fn grid_expansion_order() {
        let cfg = with(
            r#"
            [[algorithms]]
            name = "zpdvr"
            eta = [0.1, 1]
            p = [0.01, 0.02]
            [[algorithms]]
            name = "zpsvrg"
            eta = 0.5
            m = [10, 50]
            "#,
        )
        .unwrap();
        let c = cfg.candidates(10).unwrap();
        assert_eq!(c.len(), 6);
        match (&c[1], &c[2]) {
            (AlgorithmSpec::Zpdvr(a), AlgorithmSpec::Zpdvr(b)) => {
                assert_eq!((a.eta, a.refresh), (0.1, Refresh::Bernoulli { p: 0.02 }));
                assert_eq!((b.eta, b.refresh), (1.0, Refresh::Bernoulli { p: 0.01 }));
            }
            _ => panic!(),
        }
        assert!(matches!(&c[5], AlgorithmSpec::Zpsvrg(z) if z.m == 50));
        assert!(!cfg.is_singleton());
    }

    #[test]
    fn defaults_and_periodic_refresh() {
        let cfg = with(
            r#"
            [[algorithms]]
            name = "zpdvr"
            eta = 1
            refresh = "periodic"
            batch_samples = 3
            "#,
        )
        .unwrap();
        let c = cfg.candidates(10).unwrap();
        assert!(
            matches!(&c[0], AlgorithmSpec::Zpdvr(z) if z.refresh == Refresh::Periodic { every: 4 })
        );
        let cfg = with("[[algorithms]]\nname = \"zpdvr\"\neta = 1\n").unwrap();
        let c = cfg.candidates(10).unwrap();
        assert!(
            matches!(&c[0], AlgorithmSpec::Zpdvr(z) if z.refresh == Refresh::Bernoulli { p: 0.1 })
        );
        assert_eq!(cfg.seed_list(), vec![0]);
    }

    #[test]
    fn config_errors() {
        assert!(matches!(with(""), Err(Error::Config(_))));
        assert!(matches!(
            with("[[algorithms]]\nname = \"pgd\"\neta = []\n"),
            Err(Error::Config(_))
        ));
        assert!(with("[[algorithms]]\nname = \"zpsvrg\"\neta = 1\n").is_err());
        assert!(with("[[algorithms]]\nname = \"pgd\"\neta = 1\np = 0.5\n").is_err());
        assert!(with("[[algorithms]]\nname = \"nope\"\neta = 1\n").is_err());
        assert!(ExperimentConfig::from_toml(
            r#"
            budget = 10
            [problem]
            kind = "libsvm"
            path = "/does/not/exist"
            lambda1 = 0
            lambda2 = 1
            [[algorithms]]
            name = "pgd"
            eta = 1
            "#
        )
        .is_err());
    }

    #[test]
    fn budget_in_units_of_nd() {
        let text = format!(
            "{}\n[[algorithms]]\nname = \"pgd\"\neta = 1\n",
            BASE.replace("budget = 1000", "budget_nd = 2.5")
        );
        let cfg = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(cfg.resolved_budget(10, 3), 75);
        let round = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(round, cfg);
    }
}
