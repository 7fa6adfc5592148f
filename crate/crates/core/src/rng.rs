//! Seeded, splittable random streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::DenseVector;

/// A ChaCha8 stream identified by `(seed, stream)`.
///
/// Streams with the same seed and different ids are independent, so parallel
/// work never shares generator state.
#[derive(Clone, Debug)]
pub struct SeededRng {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        SeededRng {
            seed,
            stream,
            inner,
        }
    }

    /// A fresh generator on another stream of the same seed.
    pub fn child(&self, stream: u64) -> SeededRng {
        SeededRng::with_stream(self.seed, stream)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform draw on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    pub(crate) fn fill_normal(&mut self, out: &mut [f64]) {
        for v in out.iter_mut() {
            *v = self.inner.sample(StandardNormal);
        }
    }
}

/// `d` independent standard-normal samples.
pub fn gaussian_vector(rng: &mut SeededRng, d: usize) -> Result<DenseVector> {
    if d == 0 {
        return Err(Error::InvalidDimension(d));
    }
    let mut out = vec![0.0; d];
    rng.fill_normal(&mut out);
    Ok(DenseVector::from_raw(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_dimension_is_rejected() {
        let mut rng = SeededRng::new(1);
        assert!(matches!(
            gaussian_vector(&mut rng, 0),
            Err(Error::InvalidDimension(0))
        ));
    }

    #[test]
    fn same_seed_gives_identical_vectors() {
        let mut a = SeededRng::new(42);
        let mut b = SeededRng::new(42);
        for _ in 0..10 {
            let u = gaussian_vector(&mut a, 7).unwrap();
            let v = gaussian_vector(&mut b, 7).unwrap();
            let ub: Vec<u64> = u.iter().map(|x| x.to_bits()).collect();
            let vb: Vec<u64> = v.iter().map(|x| x.to_bits()).collect();
            assert_eq!(ub, vb);
        }
    }

    #[test]
    fn streams_differ() {
        let root = SeededRng::new(9);
        let mut a = root.child(1);
        let mut b = root.child(2);
        assert_ne!(a.uniform(), b.uniform());
        let mut c = SeededRng::with_stream(9, 1);
        let mut a2 = root.child(1);
        assert_eq!(c.uniform().to_bits(), a2.uniform().to_bits());
    }

    #[test]
    fn coordinate_means_are_centered() {
        let mut rng = SeededRng::new(2024);
        let n = 1_000_000;
        let mut sums = [0.0f64; 3];
        for _ in 0..n {
            let u = gaussian_vector(&mut rng, 3).unwrap();
            for (s, x) in sums.iter_mut().zip(u.iter()) {
                *s += x;
            }
        }
        for s in sums {
            let mean = s / n as f64;
            assert!(mean.abs() <= 0.004, "mean {mean}");
        }
    }

    #[test]
    fn squared_norm_mean_is_dimension() {
        let mut rng = SeededRng::new(77);
        let n = 1_000_000;
        let d = 5;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let q = gaussian_vector(&mut rng, d).unwrap().norm_sq();
            sum += q;
            sum_sq += q * q;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        let stderr = (var / n as f64).sqrt();
        assert!((mean - 5.0).abs() <= 0.05, "mean {mean}");
        assert!(
            (mean - 5.0).abs() <= 3.0 * stderr,
            "mean {mean} stderr {stderr}"
        );
    }
}
