//! Nesterov accelerated gradient in its two algebraically equivalent forms.
//!
//! [`AgdState`] evaluates the gradient at the extrapolated point
//! `θ_k − η·α·m_{k−1}`:
//!
//! ```text
//! g_k     = ∇f(θ_k − η·α·m_{k−1})
//! m_k     = α·m_{k−1} + g_k
//! θ_{k+1} = θ_k − η·m_k
//! ```
//!
//! [`Agd2State`] evaluates at the current iterate and adds a
//! gradient-difference correction instead:
//!
//! ```text
//! m̄_k     = α·m̄_{k−1} + (∇f(θ̄_k) + α·(∇f(θ̄_k) − ∇f(θ̄_{k−1})))
//! θ̄_{k+1} = θ̄_k − η·m̄_k
//! ```
//!
//! The substitution `θ̄_{k+1} = θ_{k+1} − η·α·m_k` maps one onto the other,
//! provided the second form starts with a zero gradient history (see
//! [`Agd2State::matching_agd`]).

use crate::error::{domain, Result};
use crate::linalg::DenseVector;
use crate::optim::Optimizer;

fn validate(eta: f64, alpha: f64) -> Result<()> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(domain(format!("step size must be positive, got {eta}")));
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(domain(format!("momentum alpha must lie in [0, 1), got {alpha}")));
    }
    Ok(())
}

/// Accelerated gradient descent with extrapolated gradient queries.
#[derive(Debug, Clone, PartialEq)]
pub struct AgdState {
    pub theta: DenseVector,
    pub momentum: DenseVector,
    pub eta: f64,
    pub alpha: f64,
    pub k: u64,
}

impl AgdState {
    pub fn new(theta0: DenseVector, eta: f64, alpha: f64) -> Result<Self> {
        validate(eta, alpha)?;
        let momentum = DenseVector::zeros(theta0.len());
        Ok(AgdState {
            theta: theta0,
            momentum,
            eta,
            alpha,
            k: 0,
        })
    }

    /// `θ_k − η·α·m_{k−1}`, where the next gradient must be evaluated.
    pub fn query(&self) -> DenseVector {
        map_agd_to_agd2(&self.theta, &self.momentum, self.eta, self.alpha)
    }

    pub fn step(&mut self, grad: &DenseVector) -> Result<()> {
        self.theta.ensure_same_len(grad)?;
        for (m, &g) in self.momentum.as_mut_slice().iter_mut().zip(grad) {
            *m = self.alpha * *m + g;
        }
        for (t, &m) in self.theta.as_mut_slice().iter_mut().zip(&self.momentum) {
            *t -= self.eta * m;
        }
        self.k += 1;
        Ok(())
    }
}

/// Free-function form of [`AgdState::query`].
pub fn agd_query(state: &AgdState) -> DenseVector {
    state.query()
}

/// Free-function form of [`AgdState::step`].
pub fn agd_step(mut state: AgdState, grad: &DenseVector) -> Result<AgdState> {
    state.step(grad)?;
    Ok(state)
}

/// Accelerated gradient descent evaluated at the current iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct Agd2State {
    pub theta_bar: DenseVector,
    pub momentum_bar: DenseVector,
    /// `∇f(θ̄_{k−1})`. `None` means the first step sees a zero difference.
    pub prev_grad: Option<DenseVector>,
    pub eta: f64,
    pub alpha: f64,
    pub k: u64,
}

impl Agd2State {
    /// Fresh state whose first step uses `prev_grad = g`, i.e. no
    /// difference correction.
    pub fn new(theta0: DenseVector, eta: f64, alpha: f64) -> Result<Self> {
        validate(eta, alpha)?;
        let momentum_bar = DenseVector::zeros(theta0.len());
        Ok(Agd2State {
            theta_bar: theta0,
            momentum_bar,
            prev_grad: None,
            eta,
            alpha,
            k: 0,
        })
    }

    /// Fresh state that reproduces an [`AgdState`] started at the same
    /// point: the gradient history is zero, so `m̄_0 = (1+α)·∇f(θ̄_0)`.
    pub fn matching_agd(theta0: DenseVector, eta: f64, alpha: f64) -> Result<Self> {
        let mut state = Self::new(theta0, eta, alpha)?;
        state.prev_grad = Some(DenseVector::zeros(state.theta_bar.len()));
        Ok(state)
    }

    pub fn step(&mut self, grad: &DenseVector) -> Result<()> {
        self.theta_bar.ensure_same_len(grad)?;
        let prev = match self.prev_grad.take() {
            Some(p) => {
                p.ensure_same_len(grad)?;
                p
            }
            None => grad.clone(),
        };
        let a = self.alpha;
        for ((m, &g), &gp) in self
            .momentum_bar
            .as_mut_slice()
            .iter_mut()
            .zip(grad)
            .zip(&prev)
        {
            *m = a * *m + (g + a * (g - gp));
        }
        for (t, &m) in self.theta_bar.as_mut_slice().iter_mut().zip(&self.momentum_bar) {
            *t -= self.eta * m;
        }
        self.prev_grad = Some(grad.clone());
        self.k += 1;
        Ok(())
    }
}

/// Free-function form of [`Agd2State::step`].
pub fn agd2_step(mut state: Agd2State, grad: &DenseVector) -> Result<Agd2State> {
    state.step(grad)?;
    Ok(state)
}

/// `θ̄ = θ − η·α·m_prev`.
pub fn map_agd_to_agd2(theta: &DenseVector, m_prev: &DenseVector, eta: f64, alpha: f64) -> DenseVector {
    theta
        .iter()
        .zip(m_prev)
        .map(|(&t, &m)| t - eta * alpha * m)
        .collect()
}

impl Optimizer for AgdState {
    fn params(&self) -> &DenseVector {
        &self.theta
    }

    fn query_point(&self) -> DenseVector {
        self.query()
    }

    fn step(&mut self, grad: &DenseVector) -> Result<()> {
        AgdState::step(self, grad)
    }
}

impl Optimizer for Agd2State {
    fn params(&self) -> &DenseVector {
        &self.theta_bar
    }

    fn step(&mut self, grad: &DenseVector) -> Result<()> {
        Agd2State::step(self, grad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn scalar(x: f64) -> DenseVector {
        DenseVector::from([x])
    }

    #[test]
    fn query_point_examples() {
        let s = AgdState::new(scalar(1.0), 0.1, 0.9).unwrap();
        assert_eq!(agd_query(&s), scalar(1.0));

        let mut s = AgdState::new(scalar(0.9), 0.1, 0.9).unwrap();
        s.momentum = scalar(1.0);
        assert_abs_diff_eq!(s.query()[0], 0.81, epsilon = 1e-15);

        let mut s = AgdState::new(scalar(0.3), 0.1, 0.0).unwrap();
        s.momentum = scalar(5.0);
        assert_eq!(s.query(), s.theta);
    }

    #[test]
    fn agd_two_steps_on_half_square() {
        // f = θ²/2, so ∇f is the identity
        let s = AgdState::new(scalar(1.0), 0.1, 0.9).unwrap();
        let g = s.query();
        let s = agd_step(s, &g).unwrap();
        assert_abs_diff_eq!(s.momentum[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.theta[0], 0.9, epsilon = 1e-15);

        let g = s.query();
        assert_abs_diff_eq!(g[0], 0.81, epsilon = 1e-15);
        let s = agd_step(s, &g).unwrap();
        assert_abs_diff_eq!(s.momentum[0], 1.71, epsilon = 1e-15);
        assert_abs_diff_eq!(s.theta[0], 0.729, epsilon = 1e-15);
        assert_eq!(s.k, 2);
    }

    #[test]
    fn agd_zero_gradient_only_decays_momentum() {
        let mut s = AgdState::new(DenseVector::from([1.0, -2.0]), 0.1, 0.5).unwrap();
        s.momentum = DenseVector::from([2.0, 4.0]);
        s.step(&DenseVector::zeros(2)).unwrap();
        assert_eq!(s.momentum, DenseVector::from([1.0, 2.0]));
        assert_abs_diff_eq!(s.theta[0], 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(s.theta[1], -2.2, epsilon = 1e-15);
    }

    #[test]
    fn agd2_examples() {
        // First step with zero-difference convention is a plain gradient step.
        let s = Agd2State::new(scalar(1.0), 0.1, 0.9).unwrap();
        let s = agd2_step(s, &scalar(1.0)).unwrap();
        assert_abs_diff_eq!(s.momentum_bar[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.theta_bar[0], 0.9, epsilon = 1e-15);

        let g = s.theta_bar.clone();
        let s = agd2_step(s, &g).unwrap();
        assert_abs_diff_eq!(s.momentum_bar[0], 1.71, epsilon = 1e-15);
        assert_abs_diff_eq!(s.theta_bar[0], 0.729, epsilon = 1e-15);
    }

    #[test]
    fn agd2_matching_start_follows_mapped_agd() {
        // AGD from θ0 = 1: θ̄_1 = θ_1 − η·α·m_0 = 0.9 − 0.09 = 0.81.
        let mut s = Agd2State::matching_agd(scalar(1.0), 0.1, 0.9).unwrap();
        s.step(&scalar(1.0)).unwrap();
        assert_abs_diff_eq!(s.momentum_bar[0], 1.9, epsilon = 1e-15);
        assert_abs_diff_eq!(s.theta_bar[0], 0.81, epsilon = 1e-15);
    }

    #[test]
    fn zero_alpha_is_sgd() {
        let mut s = Agd2State::new(DenseVector::from([1.0, 2.0]), 0.25, 0.0).unwrap();
        s.step(&DenseVector::from([4.0, -4.0])).unwrap();
        s.step(&DenseVector::from([2.0, 8.0])).unwrap();
        assert_eq!(s.theta_bar, DenseVector::from([1.0 - 1.0 - 0.5, 2.0 + 1.0 - 2.0]));
    }

    #[test]
    fn map_examples() {
        let t = DenseVector::from([0.5, -1.0]);
        assert_eq!(map_agd_to_agd2(&t, &DenseVector::zeros(2), 0.1, 0.9), t);
        assert_abs_diff_eq!(map_agd_to_agd2(&scalar(0.9), &scalar(1.0), 0.1, 0.9)[0], 0.81, epsilon = 1e-15);
        assert_eq!(map_agd_to_agd2(&t, &DenseVector::from([3.0, 3.0]), 0.1, 0.0), t);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(AgdState::new(scalar(0.0), 0.0, 0.5).is_err());
        assert!(AgdState::new(scalar(0.0), 0.1, 1.0).is_err());
        let mut s = AgdState::new(scalar(0.0), 0.1, 0.5).unwrap();
        assert!(s.step(&DenseVector::zeros(2)).is_err());
        let mut s = Agd2State::new(scalar(0.0), 0.1, 0.5).unwrap();
        assert!(s.step(&DenseVector::zeros(3)).is_err());
    }
}
