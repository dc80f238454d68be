//! Central finite-difference validation of analytic gradients.

use crate::linalg::DenseVector;
use crate::problems::Objective;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    /// Largest `|analytic − numeric| / max(|analytic|, |numeric|, 1)` over coordinates.
    pub max_rel_error: f64,
    pub worst_index: usize,
}

/// Compare `grad` against central differences with step `1e−6·(1+|θ_i|)`.
pub fn check_gradient(objective: &dyn Objective, theta: &DenseVector) -> GradCheckReport {
    let analytic = objective.grad(theta);
    let mut probe = theta.clone();
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst_index: 0,
    };
    for i in 0..theta.len() {
        let t = theta[i];
        let h = 1e-6 * (1.0 + t.abs());
        probe.as_mut_slice()[i] = t + h;
        let up = objective.loss(&probe);
        probe.as_mut_slice()[i] = t - h;
        let down = objective.loss(&probe);
        probe.as_mut_slice()[i] = t;
        let numeric = (up - down) / (2.0 * h);
        let scale = analytic[i].abs().max(numeric.abs()).max(1.0);
        let err = (analytic[i] - numeric).abs() / scale;
        if err > report.max_rel_error || err.is_nan() {
            report = GradCheckReport {
                max_rel_error: err,
                worst_index: i,
            };
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::Linear;

    #[test]
    fn detects_wrong_gradient() {
        struct Broken;
        impl Objective for Broken {
            fn name(&self) -> &str {
                "broken"
            }
            fn dim(&self) -> usize {
                2
            }
            fn loss(&self, t: &DenseVector) -> f64 {
                t[0] * t[0] + 3.0 * t[1]
            }
            fn grad(&self, t: &DenseVector) -> DenseVector {
                DenseVector::from([2.0 * t[0], 2.9])
            }
        }
        let r = check_gradient(&Broken, &DenseVector::from([0.5, 0.5]));
        assert_eq!(r.worst_index, 1);
        assert!(r.max_rel_error > 0.03);

        let lin = Linear::new(DenseVector::from([1.0, -4.0]), 0.0);
        assert!(check_gradient(&lin, &DenseVector::from([3.0, 2.0])).max_rel_error < 1e-8);
    }
}
