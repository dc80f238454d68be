use crate::linalg::DenseVector;
use crate::problems::Objective;

/// `f(θ) = ⟨c, θ⟩ + b`. Unbounded below; used where a constant gradient is needed.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    coef: DenseVector,
    offset: f64,
}

impl Linear {
    pub fn new(coef: DenseVector, offset: f64) -> Self {
        Linear { coef, offset }
    }
}

impl Objective for Linear {
    fn name(&self) -> &str {
        "linear"
    }

    fn dim(&self) -> usize {
        self.coef.len()
    }

    fn loss(&self, theta: &DenseVector) -> f64 {
        self.coef.dot(theta).unwrap_or(f64::NAN) + self.offset
    }

    fn grad(&self, _theta: &DenseVector) -> DenseVector {
        self.coef.clone()
    }
}
