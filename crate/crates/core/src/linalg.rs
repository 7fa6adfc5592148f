//! Dense vectors, sparse rows and the soft-thresholding primitive.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite-valued vector in `R^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dense vector"));
        }
        Ok(DenseVector(values))
    }

    pub fn zeros(d: usize) -> Self {
        DenseVector(vec![0.0; d])
    }

    /// Wraps values produced by internal arithmetic on finite inputs.
    /// Callers that can overflow check [`DenseVector::is_finite`] afterwards.
    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        DenseVector(values)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(&self.0, other)
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.0, &self.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `self - other`
    pub fn sub(&self, other: &[f64]) -> DenseVector {
        DenseVector(self.0.iter().zip(other).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &[f64]) -> DenseVector {
        DenseVector(self.0.iter().zip(other).map(|(a, b)| a + b).collect())
    }

    pub fn scaled(&self, a: f64) -> DenseVector {
        DenseVector(self.0.iter().map(|v| a * v).collect())
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &[f64]) {
        axpy(a, x, &mut self.0);
    }

    pub fn dist_sq(&self, other: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    pub fn l1_norm(&self) -> f64 {
        self.0.iter().map(|v| v.abs()).sum()
    }
}

impl Deref for DenseVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for DenseVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for DenseVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        DenseVector::new(values)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y += a * x`
#[inline]
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// `x + a * y` as a new buffer.
#[inline]
pub(crate) fn offset(x: &[f64], a: f64, y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(xi, yi)| xi + a * yi).collect()
}

/// A sparse row with strictly increasing 0-based column indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseRow {
    indices: Vec<usize>,
    values: Vec<f64>,
    dim: usize,
}

impl SparseRow {
    pub fn new(indices: Vec<usize>, values: Vec<f64>, dim: usize) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "sparse row has {} indices but {} values",
                indices.len(),
                values.len()
            )));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "sparse row indices must be strictly increasing".into(),
            ));
        }
        if let Some(&last) = indices.last() {
            if last >= dim {
                return Err(Error::InvalidInput(format!(
                    "sparse row index {last} out of range for dimension {dim}"
                )));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("sparse row"));
        }
        Ok(SparseRow {
            indices,
            values,
            dim,
        })
    }

    pub fn from_dense(dense: &[f64]) -> Result<Self> {
        let (indices, values) = dense
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(j, v)| (j, *v))
            .unzip();
        SparseRow::new(indices, values, dense.len())
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        self.indices
            .iter()
            .zip(&self.values)
            .map(|(&j, v)| v * x[j])
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// `y += a * self`
    pub fn axpy_into(&self, a: f64, y: &mut [f64]) {
        for (&j, v) in self.indices.iter().zip(&self.values) {
            y[j] += a * v;
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.axpy_into(1.0, &mut out);
        out
    }
}

/// Componentwise `sign(x_j) * max(|x_j| - t, 0)`.
pub fn soft_threshold(x: &[f64], t: f64) -> Result<DenseVector> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidThreshold(t));
    }
    let mut out = x.to_vec();
    soft_threshold_in_place(&mut out, t);
    Ok(DenseVector::from_raw(out))
}

pub(crate) fn soft_threshold_in_place(x: &mut [f64], t: f64) {
    if t == 0.0 {
        return;
    }
    for v in x.iter_mut() {
        let a = v.abs() - t;
        *v = if a > 0.0 { a.copysign(*v) } else { 0.0 };
    }
}
