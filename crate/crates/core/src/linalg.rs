//! Dense vector algebra and seeded randomness.
//!
//! Every reduction sums in ascending index order so repeated runs are
//! bit-identical. Binary operations return [`Error::LengthMismatch`] when the
//! operands disagree in length.

use std::fmt;
use std::ops::Index;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// A fixed-length vector of `f64`.
#[derive(Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DenseVector(Vec<f64>);

/// Euclidean and max norms of a vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l2: f64,
    pub linf: f64,
}

impl DenseVector {
    pub fn new(elements: Vec<f64>) -> Self {
        DenseVector(elements)
    }

    pub fn zeros(len: usize) -> Self {
        DenseVector(vec![0.0; len])
    }

    pub fn filled(len: usize, value: f64) -> Self {
        DenseVector(vec![value; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn ensure_same_len(&self, other: &DenseVector) -> Result<()> {
        if self.len() == other.len() {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                left: self.len(),
                right: other.len(),
            })
        }
    }

    /// Index of the first NaN or infinite element, if any.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.0.iter().position(|x| !x.is_finite())
    }

    pub fn is_finite(&self) -> bool {
        self.first_non_finite().is_none()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> DenseVector {
        DenseVector(self.0.iter().map(|&x| f(x)).collect())
    }

    fn zip_with(&self, other: &DenseVector, f: impl Fn(f64, f64) -> f64) -> Result<DenseVector> {
        self.ensure_same_len(other)?;
        Ok(DenseVector(
            self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect(),
        ))
    }

    pub fn add(&self, other: &DenseVector) -> Result<DenseVector> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &DenseVector) -> Result<DenseVector> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> DenseVector {
        self.map(|x| s * x)
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &DenseVector) -> Result<()> {
        self.ensure_same_len(x)?;
        for (y, &xi) in self.0.iter_mut().zip(&x.0) {
            *y += a * xi;
        }
        Ok(())
    }

    /// Elementwise product `a ∘ b`.
    pub fn hadamard(&self, other: &DenseVector) -> Result<DenseVector> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Elementwise quotient `a / b`; every `b[i]` must be nonzero.
    pub fn elementwise_div(&self, other: &DenseVector) -> Result<DenseVector> {
        self.ensure_same_len(other)?;
        if let Some(index) = other.0.iter().position(|&b| b == 0.0) {
            return Err(Error::ZeroDenominator { index });
        }
        Ok(DenseVector(
            self.0.iter().zip(&other.0).map(|(&a, &b)| a / b).collect(),
        ))
    }

    pub fn dot(&self, other: &DenseVector) -> Result<f64> {
        self.ensure_same_len(other)?;
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum())
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum()
    }

    pub fn l2(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn linf(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
    }

    pub fn norms(&self) -> Norms {
        Norms {
            l2: self.l2(),
            linf: self.linf(),
        }
    }

    /// `‖x‖²_{√n} = Σ (√n[i] + ε)·x[i]²`, the preconditioner-weighted norm.
    pub fn weighted_norm_sq(&self, n: &DenseVector, eps: f64) -> Result<f64> {
        self.ensure_same_len(n)?;
        if !(eps > 0.0) {
            return Err(domain(format!("weighted norm needs eps > 0, got {eps}")));
        }
        if let Some(i) = n.0.iter().position(|&v| v < 0.0) {
            return Err(domain(format!("negative second moment {} at index {i}", n.0[i])));
        }
        Ok(self
            .0
            .iter()
            .zip(&n.0)
            .map(|(&x, &ni)| (ni.sqrt() + eps) * x * x)
            .sum())
    }

    /// Squared distance `‖self − other‖²`.
    pub fn dist_sq(&self, other: &DenseVector) -> Result<f64> {
        self.ensure_same_len(other)?;
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum())
    }
}

/// Free-function form of [`DenseVector::hadamard`].
pub fn hadamard(a: &DenseVector, b: &DenseVector) -> Result<DenseVector> {
    a.hadamard(b)
}

/// Free-function form of [`DenseVector::elementwise_div`].
pub fn elementwise_div(a: &DenseVector, b: &DenseVector) -> Result<DenseVector> {
    a.elementwise_div(b)
}

/// Free-function form of [`DenseVector::weighted_norm_sq`].
pub fn weighted_norm_sq(x: &DenseVector, n: &DenseVector, eps: f64) -> Result<f64> {
    x.weighted_norm_sq(n, eps)
}

/// Free-function form of [`DenseVector::norms`].
pub fn norms(x: &DenseVector) -> Norms {
    x.norms()
}

impl fmt::Debug for DenseVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.0).finish()
    }
}

impl Index<usize> for DenseVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<Vec<f64>> for DenseVector {
    fn from(v: Vec<f64>) -> Self {
        DenseVector(v)
    }
}

impl From<&[f64]> for DenseVector {
    fn from(v: &[f64]) -> Self {
        DenseVector(v.to_vec())
    }
}

impl<const N: usize> From<[f64; N]> for DenseVector {
    fn from(v: [f64; N]) -> Self {
        DenseVector(v.to_vec())
    }
}

impl FromIterator<f64> for DenseVector {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        DenseVector(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a DenseVector {
    type Item = &'a f64;
    type IntoIter = std::slice::Iter<'a, f64>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Deterministic random source. Identical seed and call sequence give
/// bit-identical draws.
#[derive(Clone, Debug)]
pub struct SeededRng {
    seed: u64,
    draws: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng {
            seed,
            draws: 0,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent generator for a numbered sub-stream of the same seed.
    pub fn fork(&self, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(stream.wrapping_add(1));
        SeededRng {
            seed: self.seed,
            draws: 0,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of scalar draws taken so far.
    pub fn position(&self) -> u64 {
        self.draws
    }

    pub fn normal(&mut self) -> f64 {
        self.draws += 1;
        self.inner.sample(StandardNormal)
    }

    /// Uniform draw from `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.draws += 1;
        self.inner.random_range(lo..hi)
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.draws += 1;
        self.inner.random_range(0..n)
    }

    pub fn normal_vector(&mut self, len: usize, std: f64) -> DenseVector {
        (0..len).map(|_| std * self.normal()).collect()
    }

    pub fn uniform_vector(&mut self, len: usize, lo: f64, hi: f64) -> DenseVector {
        (0..len).map(|_| self.uniform(lo, hi)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v<const N: usize>(x: [f64; N]) -> DenseVector {
        DenseVector::from(x)
    }

    #[test]
    fn hadamard_examples() {
        assert_eq!(hadamard(&v([1.0, 2.0]), &v([3.0, 4.0])).unwrap(), v([3.0, 8.0]));
        let x = v([1.5, -2.0, 7.0]);
        assert_eq!(x.hadamard(&DenseVector::zeros(3)).unwrap(), DenseVector::zeros(3));
        assert_eq!(x.hadamard(&DenseVector::filled(3, 1.0)).unwrap(), x);
        assert_eq!(
            x.hadamard(&DenseVector::zeros(2)),
            Err(Error::LengthMismatch { left: 3, right: 2 })
        );
    }

    #[test]
    fn division_examples() {
        assert_eq!(elementwise_div(&v([6.0, 8.0]), &v([2.0, 4.0])).unwrap(), v([3.0, 2.0]));
        let x = v([0.25, -3.0]);
        assert_eq!(x.elementwise_div(&DenseVector::filled(2, 1.0)).unwrap(), x);
        assert_eq!(
            v([1.0]).elementwise_div(&v([0.0])),
            Err(Error::ZeroDenominator { index: 0 })
        );
        assert_eq!(
            v([1.0, 1.0, 1.0]).elementwise_div(&v([1.0, 2.0, 0.0])),
            Err(Error::ZeroDenominator { index: 2 })
        );
    }

    #[test]
    fn weighted_norm_examples() {
        assert_eq!(weighted_norm_sq(&v([1.0, 1.0]), &v([4.0, 4.0]), 1.0).unwrap(), 6.0);
        assert_eq!(weighted_norm_sq(&DenseVector::zeros(2), &v([9.0, 1.0]), 0.3).unwrap(), 0.0);
        assert_eq!(weighted_norm_sq(&v([2.0]), &v([0.0]), 0.5).unwrap(), 2.0);
        assert!(matches!(
            weighted_norm_sq(&v([1.0]), &v([-1.0]), 1.0),
            Err(Error::Domain(_))
        ));
        assert!(weighted_norm_sq(&v([1.0]), &v([1.0]), 0.0).is_err());
    }

    #[test]
    fn norm_examples() {
        assert_eq!(norms(&v([3.0, 4.0])), Norms { l2: 5.0, linf: 4.0 });
        assert_eq!(norms(&DenseVector::zeros(3)), Norms { l2: 0.0, linf: 0.0 });
        assert_eq!(norms(&v([1.0, 1.0, 1.0, 1.0])), Norms { l2: 2.0, linf: 1.0 });
    }

    #[test]
    fn rng_is_reproducible() {
        let mut a = SeededRng::new(42);
        let mut b = SeededRng::new(42);
        let xa: Vec<u64> = (0..100).map(|_| a.normal().to_bits()).collect();
        let xb: Vec<u64> = (0..100).map(|_| b.normal().to_bits()).collect();
        assert_eq!(xa, xb);
        assert_eq!(a.position(), 100);

        let mut c = SeededRng::new(43);
        assert_ne!(c.normal().to_bits(), xa[0]);

        let f1 = a.fork(3).normal_vector(8, 1.0);
        let f2 = SeededRng::new(42).fork(3).normal_vector(8, 1.0);
        assert_eq!(f1, f2);
        assert_ne!(f1, SeededRng::new(42).fork(4).normal_vector(8, 1.0));
    }

    fn finite_vec(len: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1e3..1e3_f64, len)
    }

    proptest! {
        #[test]
        fn weighted_norm_is_sandwiched(
            (x, n) in (1usize..16).prop_flat_map(|d| (finite_vec(d), prop::collection::vec(0.0..1e3_f64, d))),
            eps in 1e-6..10.0_f64,
        ) {
            let x = DenseVector::new(x);
            let n = DenseVector::new(n);
            let w = x.weighted_norm_sq(&n, eps).unwrap();
            let l2sq = x.norm_sq();
            let root_max = n.map(f64::sqrt).linf();
            let tol = 1e-12 * (1.0 + w.abs());
            prop_assert!(eps * l2sq <= w + tol);
            prop_assert!(w <= (root_max + eps) * l2sq + tol);
        }

        #[test]
        fn norm_relations(x in (1usize..32).prop_flat_map(finite_vec)) {
            let x = DenseVector::new(x);
            let Norms { l2, linf } = x.norms();
            let d = x.len() as f64;
            prop_assert!(linf <= l2 * (1.0 + 1e-12));
            prop_assert!(l2 <= d.sqrt() * linf * (1.0 + 1e-12));
        }

        #[test]
        fn finite_inputs_stay_finite(
            (a, b) in (1usize..16).prop_flat_map(|d| (finite_vec(d), finite_vec(d))),
        ) {
            let a = DenseVector::new(a);
            let b = DenseVector::new(b);
            prop_assert!(a.hadamard(&b).unwrap().is_finite());
            prop_assert!(a.add(&b).unwrap().is_finite());
            let shifted = b.map(|x| x.abs() + 1.0);
            prop_assert!(a.elementwise_div(&shifted).unwrap().is_finite());
        }
    }
}
