//! Test objectives with exact gradients, stochastic gradient oracles, and
//! estimators for the smoothness constant.

mod dataset;
pub mod gradcheck;
mod linear;
mod logistic;
mod mlp;
mod quadratic;
mod rosenbrock;

use std::fmt;
use std::sync::Arc;

pub use dataset::Dataset;
pub use gradcheck::{check_gradient, GradCheckReport};
pub use linear::Linear;
pub use logistic::Logistic;
pub use mlp::Mlp;
pub use quadratic::Quadratic;
pub use rosenbrock::Rosenbrock;

use crate::error::{domain, Error, Result};
use crate::linalg::{DenseVector, SeededRng};
use crate::optim::clip_elementwise;

/// A smooth deterministic objective `f` with its exact gradient.
pub trait Objective: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    fn loss(&self, theta: &DenseVector) -> f64;

    fn grad(&self, theta: &DenseVector) -> DenseVector;

    fn loss_and_grad(&self, theta: &DenseVector) -> (f64, DenseVector) {
        (self.loss(theta), self.grad(theta))
    }

    /// Known gradient Lipschitz constant, when it is exact.
    fn lipschitz(&self) -> Option<f64> {
        None
    }

    /// Known (or lower-bounding) optimal value.
    fn min_value(&self) -> Option<f64> {
        None
    }

    /// Number of samples for finite-sum objectives.
    fn sample_count(&self) -> Option<usize> {
        None
    }

    /// Mean loss and gradient over the listed samples; `None` if not a
    /// finite sum or `indices` is empty.
    fn batch_loss_and_grad(&self, _theta: &DenseVector, _indices: &[usize]) -> Option<(f64, DenseVector)> {
        None
    }

    fn batch_grad(&self, theta: &DenseVector, indices: &[usize]) -> Option<DenseVector> {
        self.batch_loss_and_grad(theta, indices).map(|(_, g)| g)
    }
}

/// How stochastic gradients are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    /// The exact gradient.
    Exact,
    /// Additive isotropic Gaussian noise with `E‖ξ‖² = σ²`, i.e. each
    /// coordinate has standard deviation `σ/√d`.
    Gaussian { sigma: f64 },
    /// Mean gradient of `batch` samples drawn uniformly with replacement.
    Minibatch { batch: usize },
}

/// An objective plus its gradient oracle.
#[derive(Clone)]
pub struct Problem {
    objective: Arc<dyn Objective>,
    pub noise: NoiseModel,
    /// Elementwise clip applied to every sampled gradient.
    pub clip: Option<f64>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("objective", &self.objective.name())
            .field("dim", &self.objective.dim())
            .field("noise", &self.noise)
            .field("clip", &self.clip)
            .finish()
    }
}

impl Problem {
    pub fn new(objective: impl Objective + 'static) -> Self {
        Problem {
            objective: Arc::new(objective),
            noise: NoiseModel::Exact,
            clip: None,
        }
    }

    pub fn with_noise(mut self, noise: NoiseModel) -> Result<Self> {
        match noise {
            NoiseModel::Gaussian { sigma } if !(sigma >= 0.0 && sigma.is_finite()) => {
                return Err(domain(format!("noise sigma must be nonnegative, got {sigma}")));
            }
            NoiseModel::Minibatch { batch } => {
                if batch == 0 {
                    return Err(Error::Insufficient("empty minibatch".into()));
                }
                if self.objective.sample_count().is_none() {
                    return Err(Error::Config(format!(
                        "{} is not a finite-sum objective; minibatch noise is unavailable",
                        self.objective.name()
                    )));
                }
            }
            _ => {}
        }
        self.noise = noise;
        Ok(self)
    }

    pub fn with_clip(mut self, c_inf: f64) -> Result<Self> {
        if !(c_inf > 0.0) {
            return Err(domain(format!("clip bound must be positive, got {c_inf}")));
        }
        self.clip = Some(c_inf);
        Ok(self)
    }

    pub fn objective(&self) -> &dyn Objective {
        self.objective.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn loss(&self, theta: &DenseVector) -> f64 {
        self.objective.loss(theta)
    }

    pub fn grad(&self, theta: &DenseVector) -> DenseVector {
        self.objective.grad(theta)
    }

    /// Noise level σ when it is known exactly.
    pub fn sigma(&self) -> Option<f64> {
        match self.noise {
            NoiseModel::Exact => Some(0.0),
            NoiseModel::Gaussian { sigma } => Some(sigma),
            NoiseModel::Minibatch { .. } => None,
        }
    }

    /// One oracle call at `theta`: a loss value, the (clipped) stochastic
    /// gradient, and the exact gradient when it came for free or `exact` is
    /// requested. Under minibatch noise without `exact`, `loss` is the
    /// minibatch mean.
    pub fn observe(&self, theta: &DenseVector, exact: bool, rng: &mut SeededRng) -> Result<Observation> {
        if theta.len() != self.dim() {
            return Err(Error::LengthMismatch {
                left: theta.len(),
                right: self.dim(),
            });
        }
        let (loss, sample, full) = match self.noise {
            NoiseModel::Exact => {
                let (l, g) = self.objective.loss_and_grad(theta);
                (l, g.clone(), Some(g))
            }
            NoiseModel::Gaussian { sigma } => {
                let (l, g) = self.objective.loss_and_grad(theta);
                let mut s = g.clone();
                if sigma > 0.0 {
                    let std = sigma / (theta.len() as f64).sqrt();
                    for x in s.as_mut_slice() {
                        *x += std * rng.normal();
                    }
                }
                (l, s, Some(g))
            }
            NoiseModel::Minibatch { batch } => {
                let n = self
                    .objective
                    .sample_count()
                    .ok_or_else(|| Error::Config(format!("{} has no samples", self.objective.name())))?;
                let indices: Vec<usize> = (0..batch).map(|_| rng.index(n)).collect();
                let (bl, bg) = self
                    .objective
                    .batch_loss_and_grad(theta, &indices)
                    .ok_or_else(|| Error::Insufficient("empty minibatch".into()))?;
                if exact {
                    let (l, g) = self.objective.loss_and_grad(theta);
                    (l, bg, Some(g))
                } else {
                    (bl, bg, None)
                }
            }
        };
        let sample = match self.clip {
            Some(c) => clip_elementwise(&sample, c),
            None => sample,
        };
        Ok(Observation {
            loss,
            loss_exact: full.is_some(),
            sample,
            full,
        })
    }

    /// Stochastic gradient at `theta` under the configured noise model.
    pub fn sample_grad(&self, theta: &DenseVector, rng: &mut SeededRng) -> Result<DenseVector> {
        let g = sample_grad(self.objective(), theta, self.noise, rng)?;
        Ok(match self.clip {
            Some(c) => clip_elementwise(&g, c),
            None => g,
        })
    }
}

/// Result of [`Problem::observe`].
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub loss: f64,
    /// `false` when `loss` is a minibatch estimate.
    pub loss_exact: bool,
    pub sample: DenseVector,
    pub full: Option<DenseVector>,
}

/// Unbiased gradient estimate at `theta`.
pub fn sample_grad(
    objective: &dyn Objective,
    theta: &DenseVector,
    noise: NoiseModel,
    rng: &mut SeededRng,
) -> Result<DenseVector> {
    if theta.len() != objective.dim() {
        return Err(Error::LengthMismatch {
            left: theta.len(),
            right: objective.dim(),
        });
    }
    match noise {
        NoiseModel::Exact => Ok(objective.grad(theta)),
        NoiseModel::Gaussian { sigma } => {
            let mut g = objective.grad(theta);
            if sigma > 0.0 {
                let std = sigma / (theta.len() as f64).sqrt();
                for x in g.as_mut_slice() {
                    *x += std * rng.normal();
                }
            }
            Ok(g)
        }
        NoiseModel::Minibatch { batch } => {
            if batch == 0 {
                return Err(Error::Insufficient("empty minibatch".into()));
            }
            let n = objective
                .sample_count()
                .ok_or_else(|| Error::Config(format!("{} has no samples", objective.name())))?;
            let indices: Vec<usize> = (0..batch).map(|_| rng.index(n)).collect();
            objective
                .batch_grad(theta, &indices)
                .ok_or_else(|| Error::Config(format!("{} has no minibatch gradient", objective.name())))
        }
    }
}

/// Result of [`estimate_lipschitz`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzEstimate {
    pub value: f64,
    /// `false` when `value` is a sampled lower estimate.
    pub exact: bool,
}

/// Smoothness constant of `objective`: exact when the objective knows it,
/// otherwise the largest `‖∇f(x)−∇f(y)‖/‖x−y‖` over `samples` random pairs in
/// the box `center ± radius`.
pub fn estimate_lipschitz(
    objective: &dyn Objective,
    center: &DenseVector,
    radius: f64,
    samples: usize,
    rng: &mut SeededRng,
) -> LipschitzEstimate {
    if let Some(value) = objective.lipschitz() {
        return LipschitzEstimate { value, exact: true };
    }
    let mut best = 0.0_f64;
    for _ in 0..samples {
        let x: DenseVector = center.iter().map(|&c| c + rng.uniform(-radius, radius)).collect();
        let y: DenseVector = center.iter().map(|&c| c + rng.uniform(-radius, radius)).collect();
        let dx = x.dist_sq(&y).unwrap().sqrt();
        if dx == 0.0 {
            continue;
        }
        let dg = objective.grad(&x).dist_sq(&objective.grad(&y)).unwrap().sqrt();
        best = best.max(dg / dx);
    }
    LipschitzEstimate {
        value: best,
        exact: false,
    }
}

/// Diagonal quadratic with eigenvalues log-spaced over `[1, κ]` in a
/// seed-dependent order.
pub fn make_quadratic(d: usize, kappa: f64, rng: &mut SeededRng) -> Result<Quadratic> {
    Quadratic::log_spaced(d, kappa, rng)
}

pub fn make_rosenbrock(d: usize) -> Result<Rosenbrock> {
    Rosenbrock::new(d)
}

pub fn make_logistic(data: Dataset) -> Result<Logistic> {
    Logistic::new(data, 0.0)
}

pub fn make_mlp(layers: &[usize], data: Dataset) -> Result<Mlp> {
    Mlp::new(layers, data)
}

pub(crate) fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_oracle_returns_gradient() {
        let mut rng = SeededRng::new(1);
        let q = make_quadratic(5, 10.0, &mut rng).unwrap();
        let p = Problem::new(q.clone()).with_noise(NoiseModel::Gaussian { sigma: 0.0 }).unwrap();
        let theta = rng.normal_vector(5, 1.0);
        assert_eq!(p.sample_grad(&theta, &mut rng).unwrap(), q.grad(&theta));
        let p = Problem::new(q.clone());
        assert_eq!(p.sample_grad(&theta, &mut rng).unwrap(), q.grad(&theta));
        assert_eq!(p.sigma(), Some(0.0));
    }

    #[test]
    fn enumerating_batch_reproduces_full_gradient() {
        // A batch that enumerates every sample once reproduces the full gradient.
        let data = Dataset::synthetic(64, 4, 3);
        let logit = make_logistic(data).unwrap();
        let theta = DenseVector::from([0.1, -0.2, 0.3, 0.0]);
        let all: Vec<usize> = (0..64).collect();
        let g = logit.batch_grad(&theta, &all).unwrap();
        let full = logit.grad(&theta);
        assert!(g.dist_sq(&full).unwrap().sqrt() <= 1e-15);
    }

    #[test]
    fn gaussian_noise_is_unbiased() {
        let mut rng = SeededRng::new(9);
        let q = Quadratic::diagonal(vec![1.0; 100]).unwrap();
        let p = Problem::new(q.clone()).with_noise(NoiseModel::Gaussian { sigma: 1.0 }).unwrap();
        let theta = rng.normal_vector(100, 1.0);
        let exact = q.grad(&theta);
        let draws = 10_000;
        let mut mean = DenseVector::zeros(100);
        for _ in 0..draws {
            mean.axpy(1.0 / draws as f64, &p.sample_grad(&theta, &mut rng).unwrap()).unwrap();
        }
        let bound = 3.0 * 1.0 / (draws as f64).sqrt();
        for i in 0..100 {
            assert!((mean[i] - exact[i]).abs() <= bound, "coordinate {i}");
        }
    }

    #[test]
    fn minibatch_rejects_empty_batches_and_plain_objectives() {
        let data = Dataset::synthetic(16, 3, 0);
        let logit = make_logistic(data).unwrap();
        assert!(Problem::new(logit).with_noise(NoiseModel::Minibatch { batch: 0 }).is_err());
        let rosen = make_rosenbrock(2).unwrap();
        assert!(Problem::new(rosen).with_noise(NoiseModel::Minibatch { batch: 4 }).is_err());
    }

    #[test]
    fn lipschitz_examples() {
        let mut rng = SeededRng::new(0);
        let q = make_quadratic(8, 100.0, &mut rng).unwrap();
        let est = estimate_lipschitz(&q, &DenseVector::zeros(8), 1.0, 10, &mut rng);
        assert_eq!(est, LipschitzEstimate { value: 100.0, exact: true });

        let lin = Linear::new(DenseVector::from([1.0, -2.0, 0.5]), 3.0);
        let est = estimate_lipschitz(&lin, &DenseVector::zeros(3), 2.0, 50, &mut rng);
        assert_eq!(est.value, 0.0);
        assert!(!est.exact);

        let rosen = make_rosenbrock(2).unwrap();
        let mut last = 0.0;
        for samples in [1, 4, 16, 64, 256] {
            let mut rng = SeededRng::new(77);
            let est = estimate_lipschitz(&rosen, &DenseVector::zeros(2), 0.5, samples, &mut rng);
            assert!(est.value.is_finite() && est.value > 0.0);
            assert!(est.value >= last);
            last = est.value;
        }
    }

    #[test]
    fn elementwise_clip_at_boundary() {
        let q = Quadratic::diagonal(vec![1.0, 10.0]).unwrap();
        let p = Problem::new(q).with_clip(2.0).unwrap();
        let mut rng = SeededRng::new(0);
        let g = p.sample_grad(&DenseVector::from([1.0, 1.0]), &mut rng).unwrap();
        assert_eq!(g, DenseVector::from([1.0, 2.0]));
    }

    #[test]
    fn stable_scalar_helpers() {
        assert_eq!(softplus(0.0), std::f64::consts::LN_2);
        assert_eq!(softplus(-800.0), 0.0);
        assert_eq!(softplus(800.0), 800.0);
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) == 1.0);
    }

    #[test]
    fn observe_matches_sampler() {
        let q = Quadratic::diagonal(vec![1.0, 2.0, 3.0]).unwrap();
        let p = Problem::new(q.clone())
            .with_noise(NoiseModel::Gaussian { sigma: 0.5 })
            .unwrap()
            .with_clip(1.5)
            .unwrap();
        let theta = DenseVector::from([1.0, -1.0, 2.0]);
        let obs = p.observe(&theta, false, &mut SeededRng::new(4)).unwrap();
        assert_eq!(obs.sample, p.sample_grad(&theta, &mut SeededRng::new(4)).unwrap());
        assert_eq!(obs.full.unwrap(), q.grad(&theta));
        assert_eq!(obs.loss, q.loss(&theta));

        let logit = make_logistic(Dataset::synthetic(32, 3, 1)).unwrap();
        let p = Problem::new(logit.clone()).with_noise(NoiseModel::Minibatch { batch: 4 }).unwrap();
        let theta = DenseVector::from([0.3, 0.1, -0.2]);
        let cheap = p.observe(&theta, false, &mut SeededRng::new(2)).unwrap();
        let full = p.observe(&theta, true, &mut SeededRng::new(2)).unwrap();
        assert!(!cheap.loss_exact && cheap.full.is_none());
        assert_eq!(cheap.sample, full.sample);
        assert_eq!(full.loss, logit.loss(&theta));
    }
}
