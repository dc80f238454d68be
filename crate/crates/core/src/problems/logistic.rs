use crate::error::{domain, Result};
use crate::linalg::DenseVector;
use crate::problems::{sigmoid, softplus, Dataset, Objective};

/// Mean cross-entropy of a linear logit, plus optional ridge term `½·l2·‖θ‖²`.
#[derive(Debug, Clone)]
pub struct Logistic {
    data: Dataset,
    l2: f64,
    lipschitz: f64,
}

impl Logistic {
    pub fn new(data: Dataset, l2: f64) -> Result<Self> {
        if !(l2 >= 0.0) {
            return Err(domain(format!("ridge coefficient must be nonnegative, got {l2}")));
        }
        let lipschitz = top_eigenvalue(&data) / (4.0 * data.len() as f64) + l2;
        Ok(Logistic { data, l2, lipschitz })
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    fn accumulate(&self, theta: &DenseVector, indices: impl Iterator<Item = usize>) -> (f64, DenseVector, usize) {
        let mut grad = vec![0.0; theta.len()];
        let mut loss = 0.0;
        let mut count = 0;
        for i in indices {
            let x = &self.data.features[i];
            let y = self.data.labels[i];
            let z = x.dot(theta).expect("dimension checked");
            loss += softplus(z) - y * z;
            let r = sigmoid(z) - y;
            for (g, &xi) in grad.iter_mut().zip(x) {
                *g += r * xi;
            }
            count += 1;
        }
        (loss, DenseVector::new(grad), count)
    }

    fn finish(&self, theta: &DenseVector, loss: f64, grad: DenseVector, count: usize) -> (f64, DenseVector) {
        let inv = 1.0 / count as f64;
        let mut g = grad.scale(inv);
        let mut l = loss * inv;
        if self.l2 > 0.0 {
            g.axpy(self.l2, theta).expect("dimension checked");
            l += 0.5 * self.l2 * theta.norm_sq();
        }
        (l, g)
    }
}

/// Largest eigenvalue of `XᵀX` by power iteration from the all-ones vector.
fn top_eigenvalue(data: &Dataset) -> f64 {
    let d = data.dim();
    let mut v = DenseVector::filled(d, 1.0 / (d as f64).sqrt());
    let mut lambda = 0.0;
    for _ in 0..500 {
        let mut w = DenseVector::zeros(d);
        for x in &data.features {
            let s = x.dot(&v).unwrap();
            w.axpy(s, x).unwrap();
        }
        let norm = w.l2();
        if norm == 0.0 {
            return 0.0;
        }
        let next = w.scale(1.0 / norm);
        let converged = (norm - lambda).abs() <= 1e-12 * norm;
        lambda = norm;
        v = next;
        if converged {
            break;
        }
    }
    lambda
}

impl Objective for Logistic {
    fn name(&self) -> &str {
        "logistic"
    }

    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn loss(&self, theta: &DenseVector) -> f64 {
        self.loss_and_grad(theta).0
    }

    fn grad(&self, theta: &DenseVector) -> DenseVector {
        self.loss_and_grad(theta).1
    }

    fn loss_and_grad(&self, theta: &DenseVector) -> (f64, DenseVector) {
        let (loss, grad, count) = self.accumulate(theta, 0..self.data.len());
        self.finish(theta, loss, grad, count)
    }

    /// Power-iteration estimate of `λ_max(XᵀX)/(4n) + l2`.
    fn lipschitz(&self) -> Option<f64> {
        Some(self.lipschitz)
    }

    /// Cross-entropy is nonnegative, so 0 bounds the optimum from below.
    fn min_value(&self) -> Option<f64> {
        Some(0.0)
    }

    fn sample_count(&self) -> Option<usize> {
        Some(self.data.len())
    }

    fn batch_loss_and_grad(&self, theta: &DenseVector, indices: &[usize]) -> Option<(f64, DenseVector)> {
        if indices.is_empty() {
            return None;
        }
        let (loss, grad, count) = self.accumulate(theta, indices.iter().copied());
        Some(self.finish(theta, loss, grad, count))
    }
}
