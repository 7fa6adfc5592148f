//! LIBSVM datasets and synthetic problem generators.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use flate2::read::GzDecoder;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SparseRow;
use crate::objective::{LogisticProblem, QuadraticLassoProblem};
use crate::rng::SeededRng;

/// Binary-labelled sparse samples, one row per sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub rows: Vec<SparseRow>,
    /// ±1
    pub labels: Vec<i8>,
    pub dim: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub n: usize,
    pub d: usize,
    pub nnz: usize,
    pub positives: usize,
    pub negatives: usize,
    /// Fraction of `+1` labels.
    pub label_balance: f64,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn summary(&self) -> DatasetSummary {
        let positives = self.labels.iter().filter(|y| **y > 0).count();
        DatasetSummary {
            n: self.rows.len(),
            d: self.dim,
            nnz: self.rows.iter().map(SparseRow::nnz).sum(),
            positives,
            negatives: self.labels.len() - positives,
            label_balance: positives as f64 / self.labels.len().max(1) as f64,
        }
    }

    /// Divides every feature by its largest absolute value in the dataset.
    pub fn scale_max_abs(&mut self) {
        let mut max_abs = vec![0.0f64; self.dim];
        for r in &self.rows {
            for (&j, v) in r.indices().iter().zip(r.values()) {
                max_abs[j] = max_abs[j].max(v.abs());
            }
        }
        for r in &mut self.rows {
            let idx = r.indices().to_vec();
            for (v, j) in r.values_mut().iter_mut().zip(idx) {
                if max_abs[j] > 0.0 {
                    *v /= max_abs[j];
                }
            }
        }
    }

    pub fn to_problem(&self, lambda1: f64, lambda2: f64) -> Result<LogisticProblem> {
        LogisticProblem::new(self.rows.clone(), self.labels.clone(), lambda1, lambda2)
    }

    /// LIBSVM text with 1-based indices.
    pub fn to_libsvm(&self) -> String {
        let mut out = String::new();
        for (r, y) in self.rows.iter().zip(&self.labels) {
            out.push_str(if *y > 0 { "+1" } else { "-1" });
            for (&j, v) in r.indices().iter().zip(r.values()) {
                let _ = write!(out, " {}:{}", j + 1, v);
            }
            out.push('\n');
        }
        out
    }
}

pub fn dataset_summary(dataset: &Dataset) -> DatasetSummary {
    dataset.summary()
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn map_label(token: &str, line: usize) -> Result<i8> {
    let y: f64 = token
        .parse()
        .map_err(|_| parse_err(line, format!("label {token:?} is not numeric")))?;
    if y == 1.0 {
        Ok(1)
    } else if y == -1.0 || y == 0.0 {
        Ok(-1)
    } else {
        Err(parse_err(line, format!("label {token:?} is not binary")))
    }
}

/// Parses `<label> <idx>:<val> ...` lines with 1-based, strictly increasing
/// indices. Labels `0`/`-1` map to −1 and `1`/`+1` to +1; `#` starts a
/// comment. The dimension is the largest index seen unless `dim_override`
/// is given.
pub fn parse_libsvm<R: BufRead>(reader: R, dim_override: Option<usize>) -> Result<Dataset> {
    let mut raw: Vec<(Vec<usize>, Vec<f64>)> = Vec::new();
    let mut labels = Vec::new();
    let mut max_index = 0usize;
    for (k, line) in reader.lines().enumerate() {
        let lineno = k + 1;
        let line = line.map_err(|e| parse_err(lineno, e.to_string()))?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label = map_label(tokens.next().unwrap_or_default(), lineno)?;
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(lineno, format!("expected index:value, got {tok:?}")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad feature index {idx:?}")))?;
            if idx == 0 {
                return Err(parse_err(lineno, "feature indices are 1-based"));
            }
            let val: f64 = val
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad feature value {val:?}")))?;
            if !val.is_finite() {
                return Err(parse_err(lineno, format!("non-finite feature value {val}")));
            }
            if indices.last().is_some_and(|&prev| idx - 1 <= prev) {
                return Err(parse_err(lineno, format!("index {idx} is not increasing")));
            }
            indices.push(idx - 1);
            values.push(val);
            max_index = max_index.max(idx);
        }
        raw.push((indices, values));
        labels.push(label);
    }
    if raw.is_empty() {
        return Err(parse_err(0, "no samples"));
    }
    let dim = match dim_override {
        Some(d) if d < max_index => {
            return Err(Error::InvalidInput(format!(
                "dimension override {d} is below the largest feature index {max_index}"
            )))
        }
        Some(d) => d,
        None => max_index,
    };
    let rows = raw
        .into_iter()
        .map(|(i, v)| SparseRow::new(i, v, dim))
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset { rows, labels, dim })
}

/// Reads a LIBSVM file, transparently decompressing gzip input.
pub fn read_libsvm_file(path: &Path, dim_override: Option<usize>) -> Result<Dataset> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut magic = [0u8; 2];
    let got = file.read(&mut magic).map_err(|e| Error::io(path, e))?;
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    if got == 2 && magic == [0x1f, 0x8b] {
        parse_libsvm(BufReader::new(GzDecoder::new(file)), dim_override)
    } else {
        parse_libsvm(BufReader::new(file), dim_override)
    }
}

/// Separable quadratics with a prescribed condition number.
///
/// Every `A_i` is diagonal with entries log-spaced in `[1/κ, 1]` (a random
/// permutation per component), so `L = 1` and `μ = 1/κ` exactly. `b_i` is
/// chosen so the unregularized minimizer has entries of magnitude in `[1, 2]`.
pub fn make_quadratic_lasso(
    n: usize,
    d: usize,
    kappa: f64,
    lambda1: f64,
    seed: u64,
) -> Result<QuadraticLassoProblem> {
    if !(kappa >= 1.0) || !kappa.is_finite() {
        return Err(Error::InvalidConditioning(kappa));
    }
    if n == 0 {
        return Err(Error::InvalidInput("need at least one component".into()));
    }
    if d == 0 {
        return Err(Error::InvalidDimension(0));
    }
    let mu = 1.0 / kappa;
    let mut rng = SeededRng::new(seed);
    let curvature: Vec<Vec<f64>> = if d == 1 {
        if kappa > 1.0 && n < 2 {
            return Err(Error::InvalidInput(
                "one-dimensional problems with kappa > 1 need two components".into(),
            ));
        }
        (0..n)
            .map(|i| vec![if i % 2 == 0 { mu } else { 1.0 }])
            .collect()
    } else {
        let mut grid: Vec<f64> = (0..d)
            .map(|j| mu * kappa.powf(j as f64 / (d - 1) as f64))
            .collect();
        grid[0] = mu;
        grid[d - 1] = 1.0;
        (0..n)
            .map(|_| {
                let mut g = grid.clone();
                for j in (1..d).rev() {
                    g.swap(j, rng.index(j + 1));
                }
                g
            })
            .collect()
    };
    let center: Vec<f64> = (0..d)
        .map(|_| {
            let m = 1.0 + rng.uniform();
            if rng.uniform() < 0.5 {
                -m
            } else {
                m
            }
        })
        .collect();
    let mut noise: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| 0.5 * rng.standard_normal()).collect())
        .collect();
    for j in 0..d {
        let mean = noise.iter().map(|r| r[j]).sum::<f64>() / n as f64;
        noise.iter_mut().for_each(|r| r[j] -= mean);
    }
    let linear = curvature
        .iter()
        .zip(&noise)
        .map(|(a, z)| (0..d).map(|j| a[j] * center[j] + z[j]).collect())
        .collect();
    QuadraticLassoProblem::new(curvature, linear, lambda1)
}

/// Synthetic sparse binary classification data.
///
/// Each feature is present with probability `density` and drawn from
/// `N(0, 1/(d·density))`, so rows have unit expected squared norm. Labels
/// follow a random linear model with 10% label noise.
pub fn make_logistic_dataset(n: usize, d: usize, density: f64, seed: u64) -> Result<Dataset> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidInput("need n >= 1 and d >= 1".into()));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "density must lie in (0, 1], got {density}"
        )));
    }
    let mut rng = SeededRng::new(seed);
    let truth: Vec<f64> = (0..d).map(|_| rng.standard_normal()).collect();
    let scale = 1.0 / (d as f64 * density).sqrt();
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let mut idx = Vec::new();
        let mut val = Vec::new();
        for j in 0..d {
            if rng.uniform() < density {
                idx.push(j);
                val.push(scale * rng.standard_normal());
            }
        }
        let row = SparseRow::new(idx, val, d)?;
        let margin = row.dot(&truth);
        let flip = rng.uniform() < 0.1;
        labels.push(if (margin >= 0.0) != flip { 1 } else { -1 });
        rows.push(row);
    }
    Ok(Dataset {
        rows,
        labels,
        dim: d,
    })
}
