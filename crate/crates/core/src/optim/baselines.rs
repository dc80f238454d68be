//! Heavy-ball SGD and AdamW, used as comparison arms.

use crate::error::{domain, Result};
use crate::linalg::DenseVector;
use crate::optim::Optimizer;

/// `v ← μ·v + g; θ ← θ − η·v`
#[derive(Debug, Clone, PartialEq)]
pub struct SgdmState {
    pub theta: DenseVector,
    pub velocity: DenseVector,
    pub lr: f64,
    pub momentum: f64,
    pub k: u64,
}

impl SgdmState {
    pub fn new(theta0: DenseVector, lr: f64, momentum: f64) -> Result<Self> {
        if !(lr > 0.0) {
            return Err(domain(format!("lr must be positive, got {lr}")));
        }
        if !(0.0..1.0).contains(&momentum) {
            return Err(domain(format!("momentum must lie in [0, 1), got {momentum}")));
        }
        let velocity = DenseVector::zeros(theta0.len());
        Ok(SgdmState {
            theta: theta0,
            velocity,
            lr,
            momentum,
            k: 0,
        })
    }

    pub fn step(&mut self, grad: &DenseVector) -> Result<()> {
        self.theta.ensure_same_len(grad)?;
        for ((t, v), &g) in self
            .theta
            .as_mut_slice()
            .iter_mut()
            .zip(self.velocity.as_mut_slice())
            .zip(grad)
        {
            *v = self.momentum * *v + g;
            *t -= self.lr * *v;
        }
        self.k += 1;
        Ok(())
    }
}

pub fn sgdm_step(mut state: SgdmState, grad: &DenseVector) -> Result<SgdmState> {
    state.step(grad)?;
    Ok(state)
}

/// AdamW hyperparameters in the usual decay-factor convention
/// (`beta1 = 0.9` keeps 90% of the old moment).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamWHyper {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    pub debias: bool,
}

impl Default for AdamWHyper {
    fn default() -> Self {
        AdamWHyper {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.0,
            debias: true,
        }
    }
}

/// Decoupled weight decay `θ ← θ·(1−η·λ)` followed by the Adam step.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamWState {
    pub theta: DenseVector,
    pub m: DenseVector,
    pub v: DenseVector,
    pub k: u64,
    pub hyper: AdamWHyper,
}

impl AdamWState {
    pub fn new(theta0: DenseVector, hyper: AdamWHyper) -> Result<Self> {
        let h = hyper;
        if !(h.lr > 0.0) || !(h.eps > 0.0) || !(h.weight_decay >= 0.0) {
            return Err(domain("AdamW needs lr > 0, eps > 0 and weight decay >= 0"));
        }
        let upper_ok = if h.debias { h.beta1 < 1.0 && h.beta2 < 1.0 } else { h.beta1 <= 1.0 && h.beta2 <= 1.0 };
        if !(h.beta1 >= 0.0 && h.beta2 >= 0.0 && upper_ok) {
            return Err(domain(format!("invalid AdamW betas ({}, {})", h.beta1, h.beta2)));
        }
        let d = theta0.len();
        Ok(AdamWState {
            theta: theta0,
            m: DenseVector::zeros(d),
            v: DenseVector::zeros(d),
            k: 0,
            hyper,
        })
    }

    pub fn step(&mut self, grad: &DenseVector) -> Result<()> {
        self.theta.ensure_same_len(grad)?;
        let h = self.hyper;
        self.k += 1;
        let (c1, c2) = if h.debias {
            (
                1.0 - h.beta1.powf(self.k as f64),
                1.0 - h.beta2.powf(self.k as f64),
            )
        } else {
            (1.0, 1.0)
        };
        let decay = 1.0 - h.lr * h.weight_decay;
        for i in 0..grad.len() {
            let g = grad[i];
            let m = &mut self.m.as_mut_slice()[i];
            *m = h.beta1 * *m + (1.0 - h.beta1) * g;
            let m_hat = *m / c1;
            let v = &mut self.v.as_mut_slice()[i];
            *v = h.beta2 * *v + (1.0 - h.beta2) * g * g;
            let v_hat = *v / c2;
            let t = &mut self.theta.as_mut_slice()[i];
            *t = *t * decay - h.lr * m_hat / (v_hat.sqrt() + h.eps);
        }
        Ok(())
    }
}

pub fn adamw_step(mut state: AdamWState, grad: &DenseVector) -> Result<AdamWState> {
    state.step(grad)?;
    Ok(state)
}

impl Optimizer for SgdmState {
    fn params(&self) -> &DenseVector {
        &self.theta
    }

    fn step(&mut self, grad: &DenseVector) -> Result<()> {
        SgdmState::step(self, grad)
    }
}

impl Optimizer for AdamWState {
    fn params(&self) -> &DenseVector {
        &self.theta
    }

    fn step(&mut self, grad: &DenseVector) -> Result<()> {
        AdamWState::step(self, grad)
    }
}
