use crate::error::{domain, Result};
use crate::linalg::DenseVector;
use crate::problems::Objective;

/// Sum of decoupled 2-D Rosenbrock valleys
/// `Σ 100·(x_{2i+1} − x_{2i}²)² + (1 − x_{2i})²`. Minimum 0 at all-ones.
#[derive(Debug, Clone, PartialEq)]
pub struct Rosenbrock {
    d: usize,
}

impl Rosenbrock {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 || d % 2 != 0 {
            return Err(domain(format!("Rosenbrock needs a positive even dimension, got {d}")));
        }
        Ok(Rosenbrock { d })
    }
}

impl Objective for Rosenbrock {
    fn name(&self) -> &str {
        "rosenbrock"
    }

    fn dim(&self) -> usize {
        self.d
    }

    fn loss(&self, theta: &DenseVector) -> f64 {
        theta
            .as_slice()
            .chunks_exact(2)
            .map(|p| {
                let (x, y) = (p[0], p[1]);
                100.0 * (y - x * x).powi(2) + (1.0 - x).powi(2)
            })
            .sum()
    }

    fn grad(&self, theta: &DenseVector) -> DenseVector {
        let mut g = Vec::with_capacity(self.d);
        for p in theta.as_slice().chunks_exact(2) {
            let (x, y) = (p[0], p[1]);
            let r = y - x * x;
            g.push(-400.0 * x * r - 2.0 * (1.0 - x));
            g.push(200.0 * r);
        }
        DenseVector::new(g)
    }

    fn min_value(&self) -> Option<f64> {
        Some(0.0)
    }
}
