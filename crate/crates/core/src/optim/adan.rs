//! The Adan optimizer with decoupled (proximal) weight decay.
//!
//! One step, given a gradient `g_k` evaluated at `θ_k`:
//!
//! ```text
//! m_k = (1−β1)·m_{k−1} + β1·g_k
//! v_k = (1−β2)·v_{k−1} + β2·(g_k − g_{k−1})
//! n_k = (1−β3)·n_{k−1} + β3·(g_k + (1−β2)·(g_k − g_{k−1}))²
//! u_k = m_k + (1−β1)·v_k
//! θ_{k+1} = (θ_k − η·u_k / (√n_k + ε)) / (1 + η·λ_k),   λ_k = λ·(1−μ)^k
//! ```
//!
//! The last line is the closed-form minimiser of
//! `λ_k/2·‖θ‖²_{√n_k} + ⟨u_k, θ−θ_k⟩ + 1/(2η)·‖θ−θ_k‖²_{√n_k}`, so every
//! step satisfies
//! `(λ_k·θ̃_k + u_k)/(√n_k+ε) = ((1+η·λ_k)/η)·(θ_k − θ_{k+1})` with
//! `θ̃_k = (√n_k+ε)∘θ_k`.
//!
//! Before the first step (and after a restart) the previous gradient is
//! taken to be `g_k` itself, so the difference terms start at zero.

use crate::error::{domain, Error, Result};
use crate::linalg::DenseVector;
use crate::optim::schedule::{clip_global, debias_factor, decay_lambda};
use crate::optim::Optimizer;

/// Adan hyperparameters. The `beta`s weight the newest sample of each EMA.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdanHyper {
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub eps: f64,
    pub lr: f64,
    /// Base decoupled weight decay λ.
    pub weight_decay: f64,
    /// Per-step geometric decay μ of the weight decay.
    pub decay_rate: f64,
    pub debias: bool,
    pub restart_period: Option<u64>,
    pub clip_norm: Option<f64>,
}

impl Default for AdanHyper {
    fn default() -> Self {
        AdanHyper {
            beta1: 0.02,
            beta2: 0.08,
            beta3: 0.01,
            eps: 1e-8,
            lr: 1.5e-2,
            weight_decay: 0.02,
            decay_rate: 0.0,
            debias: true,
            restart_period: None,
            clip_norm: None,
        }
    }
}

impl AdanHyper {
    /// `μ = √2·β3·c_∞/ε`, the decay rate tied to an ℓ∞ gradient bound.
    pub fn theorem_decay_rate(&self, c_inf: f64) -> f64 {
        std::f64::consts::SQRT_2 * self.beta3 * c_inf / self.eps
    }

    /// Accepts `β1 ∈ (0,1]` and `β2, β3 ∈ [0,1]` so that degenerate
    /// reductions (plain SGD, frozen moments) stay expressible.
    pub fn validate(&self) -> Result<()> {
        if !(self.beta1 > 0.0 && self.beta1 <= 1.0) {
            return Err(domain(format!("beta1 must lie in (0, 1], got {}", self.beta1)));
        }
        for (name, b) in [("beta2", self.beta2), ("beta3", self.beta3)] {
            if !(0.0..=1.0).contains(&b) {
                return Err(domain(format!("{name} must lie in [0, 1], got {b}")));
            }
            if self.debias && b == 0.0 {
                return Err(domain(format!("{name} = 0 cannot be bias-corrected")));
            }
        }
        if !(self.eps > 0.0) {
            return Err(domain(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(domain(format!("lr must be positive, got {}", self.lr)));
        }
        if !(self.weight_decay >= 0.0) {
            return Err(domain(format!("weight decay must be nonnegative, got {}", self.weight_decay)));
        }
        if !(0.0..1.0).contains(&self.decay_rate) {
            return Err(domain(format!("decay rate mu must lie in [0, 1), got {}", self.decay_rate)));
        }
        if self.restart_period == Some(0) {
            return Err(domain("restart period must be at least 1"));
        }
        if let Some(tau) = self.clip_norm {
            if !(tau > 0.0) {
                return Err(domain(format!("clip threshold must be positive, got {tau}")));
            }
        }
        Ok(())
    }
}

/// Everything one step used, enough to re-check the proximal identity.
#[derive(Debug, Clone, PartialEq)]
pub struct AdanTransition {
    pub k: u64,
    pub lr: f64,
    pub eps: f64,
    pub lambda: f64,
    pub theta: DenseVector,
    pub next_theta: DenseVector,
    /// Update direction `u_k` (bias-corrected when de-bias is on).
    pub u: DenseVector,
    /// Second moment under the root (bias-corrected when de-bias is on).
    pub n: DenseVector,
    /// Raw EMAs after the update, without bias correction.
    pub m: DenseVector,
    pub v: DenseVector,
    /// Gradient fed to the moments, after clipping.
    pub grad: DenseVector,
}

impl AdanTransition {
    /// `√n_k + ε` per coordinate.
    pub fn denom(&self) -> DenseVector {
        self.n.map(|n| n.sqrt() + self.eps)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdanState {
    pub theta: DenseVector,
    pub m: DenseVector,
    pub v: DenseVector,
    pub n: DenseVector,
    pub prev_grad: Option<DenseVector>,
    /// Steps taken; drives λ_k and the restart trigger.
    pub k: u64,
    /// Steps since the last restart; drives bias correction.
    pub since_restart: u64,
    pub hyper: AdanHyper,
}

impl AdanState {
    pub fn new(theta0: DenseVector, hyper: AdanHyper) -> Result<Self> {
        hyper.validate()?;
        let d = theta0.len();
        Ok(AdanState {
            theta: theta0,
            m: DenseVector::zeros(d),
            v: DenseVector::zeros(d),
            n: DenseVector::zeros(d),
            prev_grad: None,
            k: 0,
            since_restart: 0,
            hyper,
        })
    }

    pub fn lambda_k(&self) -> f64 {
        decay_lambda(self.hyper.weight_decay, self.hyper.decay_rate, self.k)
            .expect("decay rate validated at construction")
    }

    pub fn step(&mut self, grad: &DenseVector) -> Result<()> {
        self.step_transition(grad).map(|_| ())
    }

    /// Advance one step and report the quantities the step used.
    pub fn step_transition(&mut self, grad: &DenseVector) -> Result<AdanTransition> {
        self.theta.ensure_same_len(grad)?;
        if let Some(index) = grad.first_non_finite() {
            return Err(Error::NonFinite { what: "gradient", index });
        }
        let h = self.hyper;
        let g = match h.clip_norm {
            Some(tau) => clip_global(grad, tau),
            None => grad.clone(),
        };
        let prev = match self.prev_grad.take() {
            Some(p) => p,
            None => g.clone(),
        };

        let (b1, b2, b3) = (h.beta1, h.beta2, h.beta3);
        for i in 0..g.len() {
            let gi = g[i];
            let diff = gi - prev[i];
            let m = &mut self.m.as_mut_slice()[i];
            *m = (1.0 - b1) * *m + b1 * gi;
            let v = &mut self.v.as_mut_slice()[i];
            *v = (1.0 - b2) * *v + b2 * diff;
            let z = gi + (1.0 - b2) * diff;
            let n = &mut self.n.as_mut_slice()[i];
            *n = (1.0 - b3) * *n + b3 * z * z;
        }
        self.since_restart += 1;

        let (m_hat, v_hat, n_hat) = if h.debias {
            let j = self.since_restart;
            (
                self.m.scale(1.0 / debias_factor(b1, j)?),
                self.v.scale(1.0 / debias_factor(b2, j)?),
                self.n.scale(1.0 / debias_factor(b3, j)?),
            )
        } else {
            (self.m.clone(), self.v.clone(), self.n.clone())
        };
        let u: DenseVector = m_hat
            .iter()
            .zip(&v_hat)
            .map(|(&m, &v)| m + (1.0 - b1) * v)
            .collect();

        let lambda = self.lambda_k();
        let shrink = 1.0 + h.lr * lambda;
        let theta_prev = self.theta.clone();
        for ((t, &ui), &ni) in self.theta.as_mut_slice().iter_mut().zip(&u).zip(&n_hat) {
            *t = (*t - h.lr * ui / (ni.sqrt() + h.eps)) / shrink;
        }

        let transition = AdanTransition {
            k: self.k,
            lr: h.lr,
            eps: h.eps,
            lambda,
            theta: theta_prev,
            next_theta: self.theta.clone(),
            u,
            n: n_hat,
            m: self.m.clone(),
            v: self.v.clone(),
            grad: g.clone(),
        };
        self.prev_grad = Some(g);
        self.k += 1;
        if let Some(period) = h.restart_period {
            self.restart_if_due(period);
        }
        Ok(transition)
    }

    /// Zero the moments and forget the previous gradient when `k` is a
    /// positive multiple of `period`.
    pub fn restart_if_due(&mut self, period: u64) {
        if period == 0 || self.k == 0 || self.k % period != 0 {
            return;
        }
        let d = self.theta.len();
        self.m = DenseVector::zeros(d);
        self.v = DenseVector::zeros(d);
        self.n = DenseVector::zeros(d);
        self.prev_grad = None;
        self.since_restart = 0;
    }
}

/// Free-function form of [`AdanState::step`].
pub fn adan_step(mut state: AdanState, grad: &DenseVector) -> Result<AdanState> {
    state.step(grad)?;
    Ok(state)
}

/// Free-function form of [`AdanState::restart_if_due`]; `None` disables restarts.
pub fn restart_if_due(mut state: AdanState, period: Option<u64>) -> AdanState {
    if let Some(r) = period {
        state.restart_if_due(r);
    }
    state
}

impl Optimizer for AdanState {
    fn params(&self) -> &DenseVector {
        &self.theta
    }

    fn step(&mut self, grad: &DenseVector) -> Result<()> {
        AdanState::step(self, grad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn plain() -> AdanHyper {
        AdanHyper {
            weight_decay: 0.0,
            debias: false,
            ..AdanHyper::default()
        }
    }

    #[test]
    fn practical_defaults() {
        let h = AdanHyper::default();
        assert_eq!((h.beta1, h.beta2, h.beta3, h.weight_decay), (0.02, 0.08, 0.01, 0.02));
        assert_eq!(h.restart_period, None);
        h.validate().unwrap();
    }

    #[test]
    fn first_step_scalar() {
        let h = AdanHyper { lr: 0.1, ..plain() };
        let mut s = AdanState::new(DenseVector::from([1.0]), h).unwrap();
        let t = s.step_transition(&DenseVector::from([1.0])).unwrap();
        assert_relative_eq!(s.m[0], 0.02, max_relative = 1e-15);
        assert_eq!(s.v[0], 0.0);
        assert_relative_eq!(s.n[0], 0.01, max_relative = 1e-15);
        assert_relative_eq!(t.u[0], 0.02, max_relative = 1e-15);
        let expected = 1.0 - 0.1 * 0.02 / (0.1 + 1e-8);
        assert_relative_eq!(s.theta[0], expected, max_relative = 1e-15);
        assert_eq!(s.k, 1);
    }

    #[test]
    fn identity_preconditioner_is_ema_sgd() {
        let h = AdanHyper {
            beta2: 0.0,
            beta3: 0.0,
            eps: 1.0,
            lr: 0.05,
            ..plain()
        };
        let mut s = AdanState::new(DenseVector::from([2.0, -1.0]), h).unwrap();
        for g in [[1.0, 3.0], [-2.0, 0.5], [0.25, 0.25]] {
            let before = s.theta.clone();
            s.step(&DenseVector::from(g)).unwrap();
            for i in 0..2 {
                assert_eq!(s.theta[i], before[i] - 0.05 * s.m[i]);
            }
        }
    }

    #[test]
    fn stationary_gradient_decays_difference_moment() {
        let mut s = AdanState::new(DenseVector::from([0.0, 0.0]), plain()).unwrap();
        let g = DenseVector::from([0.5, -0.5]);
        s.step(&g).unwrap();
        s.step(&DenseVector::from([1.0, 1.0])).unwrap();
        let v_before = s.v.clone();
        s.step(&DenseVector::from([1.0, 1.0])).unwrap();
        for i in 0..2 {
            assert_eq!(s.v[i], (1.0 - 0.08) * v_before[i]);
        }
    }

    #[test]
    fn debiased_first_step_uses_raw_gradient() {
        let h = AdanHyper {
            weight_decay: 0.0,
            eps: 1e-12,
            lr: 0.01,
            ..AdanHyper::default()
        };
        let mut s = AdanState::new(DenseVector::from([0.0]), h).unwrap();
        let t = s.step_transition(&DenseVector::from([-3.0])).unwrap();
        assert_relative_eq!(t.u[0], -3.0, max_relative = 1e-14);
        assert_relative_eq!(t.n[0], 9.0, max_relative = 1e-14);
        assert_relative_eq!(s.theta[0], 0.01, max_relative = 1e-10);
    }

    #[test]
    fn decoupled_decay_shrinks_parameters() {
        let h = AdanHyper {
            weight_decay: 0.5,
            decay_rate: 0.1,
            lr: 0.2,
            ..plain()
        };
        let mut s = AdanState::new(DenseVector::from([1.0]), h).unwrap();
        let t0 = s.step_transition(&DenseVector::from([0.0])).unwrap();
        assert_eq!(t0.lambda, 0.5);
        assert_relative_eq!(s.theta[0], 1.0 / 1.1, max_relative = 1e-15);
        let t1 = s.step_transition(&DenseVector::from([0.0])).unwrap();
        assert_relative_eq!(t1.lambda, 0.45, max_relative = 1e-15);
    }

    #[test]
    fn proximal_identity_holds_per_step() {
        let h = AdanHyper {
            weight_decay: 0.3,
            decay_rate: 0.01,
            lr: 0.05,
            eps: 0.1,
            ..AdanHyper::default()
        };
        let mut s = AdanState::new(DenseVector::from([1.0, -2.0, 0.5]), h).unwrap();
        for k in 0..50 {
            let g = s.theta.map(|x| 2.0 * x + (k as f64).sin());
            let t = s.step_transition(&g).unwrap();
            let denom = t.denom();
            for i in 0..3 {
                let lhs = (t.lambda * denom[i] * t.theta[i] + t.u[i]) / denom[i];
                let rhs = (1.0 + t.lr * t.lambda) / t.lr * (t.theta[i] - t.next_theta[i]);
                assert!((lhs - rhs).abs() < 1e-12, "k={k} i={i}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn restart_zeroes_moments_on_schedule() {
        let h = AdanHyper {
            restart_period: Some(3),
            ..AdanHyper::default()
        };
        let mut s = AdanState::new(DenseVector::from([1.0]), h).unwrap();
        let g = DenseVector::from([0.7]);
        s.step(&g).unwrap();
        s.step(&g).unwrap();
        assert!(s.m[0] != 0.0);
        s.step(&g).unwrap();
        assert_eq!(s.k, 3);
        assert_eq!((s.m[0], s.v[0], s.n[0]), (0.0, 0.0, 0.0));
        assert!(s.prev_grad.is_none());
        s.step(&g).unwrap();
        assert!(s.m[0] != 0.0);
        assert_eq!(s.since_restart, 1);

        // k = R + 1 leaves state untouched; disabled restart never fires.
        let before = s.clone();
        s.restart_if_due(3);
        assert_eq!(s, before);
        let kept = restart_if_due(s.clone(), None);
        assert_eq!(kept, s);
    }

    #[test]
    fn rejects_bad_input() {
        let mut s = AdanState::new(DenseVector::from([0.0, 0.0]), plain()).unwrap();
        assert!(matches!(s.step(&DenseVector::from([1.0])), Err(Error::LengthMismatch { .. })));
        assert!(matches!(
            s.step(&DenseVector::from([1.0, f64::NAN])),
            Err(Error::NonFinite { index: 1, .. })
        ));
        assert_eq!(s.k, 0);
        for bad in [
            AdanHyper { beta1: 0.0, ..plain() },
            AdanHyper { eps: 0.0, ..plain() },
            AdanHyper { decay_rate: 1.0, ..plain() },
            AdanHyper { restart_period: Some(0), ..plain() },
            AdanHyper { clip_norm: Some(-1.0), ..plain() },
            AdanHyper { beta3: 0.0, debias: true, ..plain() },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn global_clipping_applies_before_moments() {
        let h = AdanHyper {
            clip_norm: Some(5.0),
            ..plain()
        };
        let mut s = AdanState::new(DenseVector::from([0.0, 0.0]), h).unwrap();
        let t = s.step_transition(&DenseVector::from([6.0, 8.0])).unwrap();
        assert_eq!(t.grad, DenseVector::from([3.0, 4.0]));
    }
}
