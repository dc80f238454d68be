use crate::error::{Error, Result};
use crate::linalg::{DenseVector, SeededRng};
use crate::problems::{sigmoid, softplus, Dataset, Objective};

/// One-hidden-layer tanh network with a scalar logit, trained with mean
/// cross-entropy.
///
/// Parameters are packed as `[W1 (hidden×input, row-major), b1, w2, b2]`.
#[derive(Debug, Clone)]
pub struct Mlp {
    data: Dataset,
    input: usize,
    hidden: usize,
}

impl Mlp {
    /// `layers` must be `[input, hidden, 1]` with `input` matching the data.
    pub fn new(layers: &[usize], data: Dataset) -> Result<Self> {
        let &[input, hidden, out] = layers else {
            return Err(Error::Config(format!(
                "MLP takes exactly three layer sizes [input, hidden, 1], got {layers:?}"
            )));
        };
        if out != 1 || hidden == 0 {
            return Err(Error::Config(format!(
                "MLP needs a positive hidden width and one output, got {layers:?}"
            )));
        }
        if input != data.dim() {
            return Err(Error::LengthMismatch {
                left: input,
                right: data.dim(),
            });
        }
        Ok(Mlp { data, input, hidden })
    }

    pub fn param_count(&self) -> usize {
        Self::packed_len(self.input, self.hidden)
    }

    /// Parameter count of an `[input, hidden, 1]` network.
    pub fn packed_len(input: usize, hidden: usize) -> usize {
        hidden * input + 2 * hidden + 1
    }

    /// Gaussian initialisation scaled by fan-in.
    pub fn init(&self, rng: &mut SeededRng) -> DenseVector {
        let (h, d) = (self.hidden, self.input);
        let mut p = Vec::with_capacity(self.param_count());
        p.extend((0..h * d).map(|_| rng.normal() / (d as f64).sqrt()));
        p.extend(std::iter::repeat_n(0.0, h));
        p.extend((0..h).map(|_| rng.normal() / (h as f64).sqrt()));
        p.push(0.0);
        DenseVector::new(p)
    }

    fn run(&self, theta: &DenseVector, indices: impl Iterator<Item = usize>) -> (f64, DenseVector) {
        let (h, d) = (self.hidden, self.input);
        let p = theta.as_slice();
        let (w1, rest) = p.split_at(h * d);
        let (b1, rest) = rest.split_at(h);
        let (w2, b2) = rest.split_at(h);
        let b2 = b2[0];

        let mut grad = vec![0.0; p.len()];
        let mut act = vec![0.0; h];
        let mut loss = 0.0;
        let mut count = 0usize;
        for i in indices {
            let x = self.data.features[i].as_slice();
            let y = self.data.labels[i];
            for j in 0..h {
                let row = &w1[j * d..(j + 1) * d];
                let a: f64 = row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + b1[j];
                act[j] = a.tanh();
            }
            let z: f64 = act.iter().zip(w2).map(|(a, w)| a * w).sum::<f64>() + b2;
            loss += softplus(z) - y * z;
            let delta = sigmoid(z) - y;

            let (gw1, rest) = grad.split_at_mut(h * d);
            let (gb1, rest) = rest.split_at_mut(h);
            let (gw2, gb2) = rest.split_at_mut(h);
            gb2[0] += delta;
            for j in 0..h {
                gw2[j] += delta * act[j];
                let da = delta * w2[j] * (1.0 - act[j] * act[j]);
                gb1[j] += da;
                for (g, &xi) in gw1[j * d..(j + 1) * d].iter_mut().zip(x) {
                    *g += da * xi;
                }
            }
            count += 1;
        }
        let inv = 1.0 / count as f64;
        grad.iter_mut().for_each(|g| *g *= inv);
        (loss * inv, DenseVector::new(grad))
    }
}

impl Objective for Mlp {
    fn name(&self) -> &str {
        "mlp"
    }

    fn dim(&self) -> usize {
        self.param_count()
    }

    fn loss(&self, theta: &DenseVector) -> f64 {
        self.loss_and_grad(theta).0
    }

    fn grad(&self, theta: &DenseVector) -> DenseVector {
        self.loss_and_grad(theta).1
    }

    fn loss_and_grad(&self, theta: &DenseVector) -> (f64, DenseVector) {
        self.run(theta, 0..self.data.len())
    }

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
        Some(self.run(theta, indices.iter().copied()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_validation() {
        let data = Dataset::synthetic(10, 3, 0);
        assert!(Mlp::new(&[3, 4], data.clone()).is_err());
        assert!(Mlp::new(&[3, 4, 2], data.clone()).is_err());
        assert!(Mlp::new(&[2, 4, 1], data.clone()).is_err());
        let m = Mlp::new(&[3, 4, 1], data).unwrap();
        assert_eq!(m.dim(), 12 + 4 + 4 + 1);
    }

    #[test]
    fn zero_parameters_give_ln2() {
        let data = Dataset::synthetic(30, 3, 2);
        let m = Mlp::new(&[3, 5, 1], data).unwrap();
        let loss = m.loss(&DenseVector::zeros(m.dim()));
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-15);
    }
}
