use crate::error::{domain, Result};
use crate::linalg::{DenseVector, SeededRng};
use crate::problems::Objective;

/// `f(θ) = ½⟨θ, Aθ⟩` with diagonal `A`. `L` is the largest eigenvalue and `f* = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    eigenvalues: DenseVector,
}

impl Quadratic {
    pub fn diagonal(eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(domain("quadratic needs at least one dimension"));
        }
        if eigenvalues.iter().any(|&a| !(a >= 0.0 && a.is_finite())) {
            return Err(domain("quadratic eigenvalues must be finite and nonnegative"));
        }
        Ok(Quadratic {
            eigenvalues: DenseVector::new(eigenvalues),
        })
    }

    /// Eigenvalues `κ^{i/(d−1)}` for `i = 0..d`, shuffled by `rng`. A
    /// one-dimensional quadratic gets the single eigenvalue `κ`.
    pub fn log_spaced(d: usize, kappa: f64, rng: &mut SeededRng) -> Result<Self> {
        if d == 0 {
            return Err(domain("quadratic needs at least one dimension"));
        }
        if !(kappa >= 1.0 && kappa.is_finite()) {
            return Err(domain(format!("condition number must be >= 1, got {kappa}")));
        }
        let mut eig: Vec<f64> = if d == 1 {
            vec![kappa]
        } else {
            (0..d)
                .map(|i| match i {
                    0 => 1.0,
                    i if i == d - 1 => kappa,
                    i => kappa.powf(i as f64 / (d - 1) as f64),
                })
                .collect()
        };
        // Fisher-Yates
        for i in (1..d).rev() {
            let j = rng.index(i + 1);
            eig.swap(i, j);
        }
        Self::diagonal(eig)
    }

    pub fn eigenvalues(&self) -> &DenseVector {
        &self.eigenvalues
    }
}

impl Objective for Quadratic {
    fn name(&self) -> &str {
        "quadratic"
    }

    fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    fn loss(&self, theta: &DenseVector) -> f64 {
        0.5 * theta
            .iter()
            .zip(&self.eigenvalues)
            .map(|(&t, &a)| t * (a * t))
            .sum::<f64>()
    }

    fn grad(&self, theta: &DenseVector) -> DenseVector {
        theta.iter().zip(&self.eigenvalues).map(|(&t, &a)| a * t).collect()
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(self.eigenvalues.linf())
    }

    fn min_value(&self) -> Option<f64> {
        Some(0.0)
    }
}
