use crate::error::{Error, Result};
use crate::linalg::{DenseVector, Norms};
use crate::optim::AdanTransition;

/// Per-step stationarity quantities of an Adan run.
///
/// `m_err_sq` and `v_sq` use the raw (uncorrected) moments, which are the
/// ones the convergence analysis tracks. `u_reg_sq` uses the direction the
/// step actually took.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateRecord {
    pub step: u64,
    pub lambda: f64,
    /// `‖u_k + λ_k·θ̃_k‖²` with `θ̃_k = (√n_k+ε)∘θ_k`.
    pub u_reg_sq: f64,
    /// `‖m_k − ∇f(θ_k)‖²`.
    pub m_err_sq: f64,
    /// `‖v_k‖²`.
    pub v_sq: f64,
    /// `F_k(θ_k) = f(θ_k) + λ_k/2·‖θ_k‖²_{√n_k}`.
    pub objective: f64,
    /// `‖θ_{k+1} − θ_k‖²`.
    pub step_sq: f64,
    /// `‖∇f(θ_{k+1}) − ∇f(θ_k)‖²`, known once the next gradient is.
    pub full_grad_change_sq: Option<f64>,
}

impl CertificateRecord {
    /// Build the record for one transition given `f(θ_k)` and `∇f(θ_k)`.
    pub fn from_transition(t: &AdanTransition, loss: f64, full_grad: &DenseVector) -> Result<Self> {
        let denom = t.denom();
        let mut u_reg_sq = 0.0;
        for i in 0..t.u.len() {
            let r = t.u[i] + t.lambda * denom[i] * t.theta[i];
            u_reg_sq += r * r;
        }
        let m_err_sq = t.m.dist_sq(full_grad)?;
        let objective = loss + 0.5 * t.lambda * t.theta.weighted_norm_sq(&t.n, t.eps)?;
        Ok(CertificateRecord {
            step: t.k,
            lambda: t.lambda,
            u_reg_sq,
            m_err_sq,
            v_sq: t.v.norm_sq(),
            objective,
            step_sq: t.next_theta.dist_sq(&t.theta)?,
            full_grad_change_sq: None,
        })
    }

    /// `2‖u+λθ̃‖² + 4‖m−∇f‖² + 4‖v‖²`, which bounds the squared gradient of
    /// the regularised objective up to constants; at most `4ε²` on average
    /// under the theorem's schedule.
    pub fn stationarity_measure(&self) -> f64 {
        2.0 * self.u_reg_sq + 4.0 * self.m_err_sq + 4.0 * self.v_sq
    }
}

/// Time averages of the three certificate quantities over `k = 0..=T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationarityAverages {
    pub avg_u: f64,
    pub avg_m_err: f64,
    pub avg_v: f64,
}

impl StationarityAverages {
    /// Compare against `ε², ε²/4, ε²/4` inflated by `factor`.
    pub fn within(&self, eps_target: f64, factor: f64) -> bool {
        let e2 = eps_target * eps_target;
        self.avg_u <= factor * e2 && self.avg_m_err <= factor * e2 / 4.0 && self.avg_v <= factor * e2 / 4.0
    }
}

pub fn stationarity_certificate(trace: &[CertificateRecord], horizon: u64) -> Result<StationarityAverages> {
    let count = horizon as usize + 1;
    if trace.len() < count {
        return Err(Error::Insufficient(format!(
            "certificate needs {count} records, trace has {}",
            trace.len()
        )));
    }
    let mut sums = [0.0; 3];
    for r in &trace[..count] {
        sums[0] += r.u_reg_sq;
        sums[1] += r.m_err_sq;
        sums[2] += r.v_sq;
    }
    let c = count as f64;
    Ok(StationarityAverages {
        avg_u: sums[0] / c,
        avg_m_err: sums[1] / c,
        avg_v: sums[2] / c,
    })
}

/// Element-wise mean of several seeds' averages.
pub fn mean_averages(per_seed: &[StationarityAverages]) -> Result<StationarityAverages> {
    if per_seed.is_empty() {
        return Err(Error::Insufficient("no seeds to average".into()));
    }
    let c = per_seed.len() as f64;
    Ok(StationarityAverages {
        avg_u: per_seed.iter().map(|a| a.avg_u).sum::<f64>() / c,
        avg_m_err: per_seed.iter().map(|a| a.avg_m_err).sum::<f64>() / c,
        avg_v: per_seed.iter().map(|a| a.avg_v).sum::<f64>() / c,
    })
}

/// Largest gradient norms seen along a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasuredConstants {
    pub c_inf: f64,
    pub c_2: f64,
    pub dim: usize,
}

impl MeasuredConstants {
    /// `c_∞ ≤ c_2 ≤ √d·c_∞`, with a relative rounding allowance.
    pub fn norms_consistent(&self) -> bool {
        let tol = 1.0 + 1e-12;
        self.c_inf <= self.c_2 * tol && self.c_2 <= (self.dim as f64).sqrt() * self.c_inf * tol
    }

    pub fn l2_to_linf_ratio(&self) -> f64 {
        self.c_2 / self.c_inf
    }
}

pub fn measure_constants(norms: &[Norms], dim: usize) -> Result<MeasuredConstants> {
    if norms.is_empty() {
        return Err(Error::Insufficient("cannot measure constants of an empty trace".into()));
    }
    let c_inf = norms.iter().map(|n| n.linf).fold(0.0, f64::max);
    let c_2 = norms.iter().map(|n| n.l2).fold(0.0, f64::max);
    Ok(MeasuredConstants { c_inf, c_2, dim })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn record(u: f64, m: f64, v: f64) -> CertificateRecord {
        CertificateRecord {
            step: 0,
            lambda: 0.0,
            u_reg_sq: u,
            m_err_sq: m,
            v_sq: v,
            objective: 0.0,
            step_sq: 0.0,
            full_grad_change_sq: None,
        }
    }

    #[test]
    fn constants_of_fixed_vectors() {
        let c = measure_constants(&[DenseVector::from([3.0, 4.0]).norms()], 2).unwrap();
        assert_eq!((c.c_inf, c.c_2, c.dim), (4.0, 5.0, 2));
        let flat = measure_constants(&[DenseVector::filled(9, 2.0).norms()], 9).unwrap();
        assert_eq!(flat.c_2, 3.0 * flat.c_inf);
        let one_hot = measure_constants(&[DenseVector::from([0.0, -7.0, 0.0]).norms()], 3).unwrap();
        assert_eq!(one_hot.c_2, one_hot.c_inf);
        for c in [c, flat, one_hot] {
            assert!(c.norms_consistent());
        }
        assert!(measure_constants(&[], 3).is_err());
    }

    #[test]
    fn averages_and_length_check() {
        let trace = vec![record(1.0, 2.0, 3.0), record(3.0, 0.0, 1.0), record(100.0, 100.0, 100.0)];
        let a = stationarity_certificate(&trace, 1).unwrap();
        assert_eq!((a.avg_u, a.avg_m_err, a.avg_v), (2.0, 1.0, 2.0));
        assert!(stationarity_certificate(&trace, 3).is_err());
        let doubled: Vec<_> = trace[..2].iter().chain(&trace[..2]).copied().collect();
        assert_eq!(stationarity_certificate(&doubled, 3).unwrap(), a);
    }

    #[test]
    fn first_record_of_a_cold_start() {
        use crate::optim::{AdanHyper, AdanState};
        let h = AdanHyper {
            debias: false,
            weight_decay: 0.0,
            ..AdanHyper::default()
        };
        let g = DenseVector::from([0.5, -2.0, 1.0]);
        let mut s = AdanState::new(DenseVector::from([1.0, 1.0, 1.0]), h).unwrap();
        let t = s.step_transition(&g).unwrap();
        let r = CertificateRecord::from_transition(&t, 0.0, &g).unwrap();
        let a = stationarity_certificate(&[r], 0).unwrap();
        assert_relative_eq!(a.avg_m_err, (1.0 - h.beta1).powi(2) * g.norm_sq(), max_relative = 1e-14);
        assert_eq!(a.avg_v, 0.0);
    }
}
