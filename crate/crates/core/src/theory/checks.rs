//! Pathwise checkers over recorded optimizer runs.

use crate::error::{domain, Error, Result};
use crate::linalg::DenseVector;
use crate::optim::{AdanTransition, Agd2State, AgdState};
use crate::problems::Objective;

/// Outcome of [`check_agd_equivalence`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalenceReport {
    /// Max over `k` of `‖θ̄_k(AGD mapped) − θ̄_k(AGD-II)‖∞`.
    pub max_deviation: f64,
    /// Max over `k` of `‖m̄_k − (α²·m_{k−1} + (1+α)·∇f(θ̄_k))‖∞`.
    pub max_momentum_gap: f64,
}

/// Run AGD and AGD-II side by side from `θ0` on exact gradients and compare
/// the AGD iterates mapped through `θ̄_k = θ_k − η·α·m_{k−1}` with the
/// AGD-II iterates, for `k = 0..=K`.
pub fn check_agd_equivalence(
    objective: &dyn Objective,
    theta0: &DenseVector,
    eta: f64,
    alpha: f64,
    steps: usize,
) -> Result<EquivalenceReport> {
    if steps == 0 {
        return Err(domain("equivalence check needs at least one step"));
    }
    if theta0.len() != objective.dim() {
        return Err(Error::LengthMismatch {
            left: theta0.len(),
            right: objective.dim(),
        });
    }
    let mut agd = AgdState::new(theta0.clone(), eta, alpha)?;
    let mut agd2 = Agd2State::matching_agd(theta0.clone(), eta, alpha)?;
    let mut max_deviation = 0.0_f64;
    let mut max_momentum_gap = 0.0_f64;
    for k in 0..=steps {
        // AGD's query point is exactly the mapped iterate θ̄_k.
        let mapped = agd.query();
        max_deviation = max_deviation.max(mapped.sub(&agd2.theta_bar)?.linf());
        if k == steps {
            break;
        }
        let m_prev = agd.momentum.clone();
        let g_bar = objective.grad(&agd2.theta_bar);
        agd.step(&objective.grad(&mapped))?;
        agd2.step(&g_bar)?;
        for i in 0..g_bar.len() {
            let expected = alpha * alpha * m_prev[i] + (1.0 + alpha) * g_bar[i];
            max_momentum_gap = max_momentum_gap.max((agd2.momentum_bar[i] - expected).abs());
        }
    }
    Ok(EquivalenceReport {
        max_deviation,
        max_momentum_gap,
    })
}

fn ensure_transition_shape(t: &AdanTransition) -> Result<()> {
    let d = t.theta.len();
    for (what, v) in [
        ("next_theta", &t.next_theta),
        ("u", &t.u),
        ("n", &t.n),
        ("m", &t.m),
        ("v", &t.v),
    ] {
        if v.len() != d {
            return Err(Error::Insufficient(format!(
                "incomplete transition at step {}: {what} has {} entries, theta has {d}",
                t.k,
                v.len()
            )));
        }
    }
    Ok(())
}

/// Largest l∞ residual of the proximal optimality condition
/// `(λ_k·θ̃_k + u_k)/(√n_k+ε) − ((1+η·λ_k)/η)·(θ_k − θ_{k+1})` over a trace.
pub fn check_prox_residual(trace: &[AdanTransition]) -> Result<f64> {
    if trace.is_empty() {
        return Err(Error::Insufficient("empty transition trace".into()));
    }
    let mut worst = 0.0_f64;
    for t in trace {
        ensure_transition_shape(t)?;
        let scale = (1.0 + t.lr * t.lambda) / t.lr;
        for i in 0..t.theta.len() {
            let denom = t.n[i].sqrt() + t.eps;
            let lhs = (t.lambda * denom * t.theta[i] + t.u[i]) / denom;
            let rhs = scale * (t.theta[i] - t.next_theta[i]);
            let r = (lhs - rhs).abs();
            if !r.is_finite() {
                return Err(Error::NonFinite {
                    what: "prox residual",
                    index: i,
                });
            }
            worst = worst.max(r);
        }
    }
    Ok(worst)
}

/// Enforce `η ≤ ε/(3L)` and `η ≤ 1/(10λ)`, naming whichever bound fails.
pub fn descent_premise(eta: f64, eps: f64, lipschitz: f64, weight_decay: f64) -> Result<()> {
    let smooth = eps / (3.0 * lipschitz);
    if !(eta <= smooth) {
        return Err(Error::Premise(format!(
            "step size {eta} exceeds eps/(3L) = {smooth}"
        )));
    }
    if weight_decay > 0.0 {
        let decay = 1.0 / (10.0 * weight_decay);
        if !(eta <= decay) {
            return Err(Error::Premise(format!(
                "step size {eta} exceeds 1/(10 lambda) = {decay}"
            )));
        }
    }
    Ok(())
}

/// Absolute slack allowed before a step counts as a descent violation.
pub const DESCENT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct DescentReport {
    pub violations: Vec<u64>,
    /// Largest `F_{k+1}(θ_{k+1}) − RHS_k` seen (negative when all hold).
    pub max_excess: f64,
    pub checked: usize,
}

fn regularised(objective: &dyn Objective, t: &AdanTransition) -> Result<f64> {
    Ok(objective.loss(&t.theta) + 0.5 * t.lambda * t.theta.weighted_norm_sq(&t.n, t.eps)?)
}

/// Check, for each consecutive pair of transitions,
///
/// ```text
/// F_{k+1}(θ_{k+1}) ≤ F_k(θ_k) − η/(4c_∞)·‖u_k + λ_k·θ̃_k‖² + η/(2ε)·‖∇f(θ_k) − u_k‖²
/// ```
///
/// with `F_k(θ) = f(θ) + λ_k/2·‖θ‖²_{√n_k}`. The premise is checked first
/// against the step size recorded in the trace and the base decay λ.
pub fn check_descent_lemma(
    objective: &dyn Objective,
    trace: &[AdanTransition],
    lipschitz: f64,
    weight_decay: f64,
    c_inf: f64,
) -> Result<DescentReport> {
    let first = trace
        .first()
        .ok_or_else(|| Error::Insufficient("empty transition trace".into()))?;
    if !(c_inf > 0.0) {
        return Err(domain(format!("c_inf must be positive, got {c_inf}")));
    }
    for t in trace {
        descent_premise(t.lr, t.eps, lipschitz, weight_decay)?;
    }
    ensure_transition_shape(first)?;

    let mut violations = Vec::new();
    let mut max_excess = f64::NEG_INFINITY;
    let mut f_now = regularised(objective, first)?;
    for pair in trace.windows(2) {
        let (t, next) = (&pair[0], &pair[1]);
        ensure_transition_shape(next)?;
        if next.theta != t.next_theta {
            return Err(Error::Insufficient(format!(
                "trace is not contiguous between steps {} and {}",
                t.k, next.k
            )));
        }
        let g = objective.grad(&t.theta);
        let denom = t.denom();
        let mut reg = 0.0;
        let mut mismatch = 0.0;
        for i in 0..g.len() {
            let r = t.u[i] + t.lambda * denom[i] * t.theta[i];
            reg += r * r;
            let e = g[i] - t.u[i];
            mismatch += e * e;
        }
        let rhs = f_now - t.lr / (4.0 * c_inf) * reg + t.lr / (2.0 * t.eps) * mismatch;
        let f_next = regularised(objective, next)?;
        let excess = f_next - rhs;
        if !excess.is_finite() {
            return Err(Error::NonFinite {
                what: "descent inequality",
                index: t.k as usize,
            });
        }
        max_excess = max_excess.max(excess);
        if excess > DESCENT_SLACK {
            violations.push(t.k);
        }
        f_now = f_next;
    }
    Ok(DescentReport {
        violations,
        max_excess,
        checked: trace.len().saturating_sub(1),
    })
}

/// Largest relative deviation of `λ_{k+1}/(1−μ)` from `λ_k` over consecutive
/// transitions. Zero weight decay gives zero.
pub fn check_lambda_schedule(trace: &[AdanTransition], decay_rate: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&decay_rate) {
        return Err(domain(format!("decay rate mu must lie in [0, 1), got {decay_rate}")));
    }
    if trace.len() < 2 {
        return Err(Error::Insufficient("lambda schedule needs two transitions".into()));
    }
    let mut worst = 0.0_f64;
    for pair in trace.windows(2) {
        let (a, b) = (pair[0].lambda, pair[1].lambda);
        if a == 0.0 && b == 0.0 {
            continue;
        }
        worst = worst.max(((b / (1.0 - decay_rate) - a) / a).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioReport {
    /// Smallest `(√n_k+ε)/(√n_{k+1}+ε)` over steps and coordinates.
    pub min_ratio: f64,
    /// `1 − μ`.
    pub bound: f64,
    pub violations: usize,
}

impl RatioReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

pub fn check_preconditioner_ratio(trace: &[AdanTransition], decay_rate: f64) -> Result<RatioReport> {
    if trace.len() < 2 {
        return Err(Error::Insufficient("ratio check needs two transitions".into()));
    }
    let bound = 1.0 - decay_rate;
    let mut min_ratio = f64::INFINITY;
    let mut violations = 0;
    for pair in trace.windows(2) {
        let (now, next) = (pair[0].denom(), pair[1].denom());
        now.ensure_same_len(&next)?;
        for (a, b) in now.iter().zip(&next) {
            let r = a / b;
            min_ratio = min_ratio.min(r);
            if r < bound {
                violations += 1;
            }
        }
    }
    Ok(RatioReport {
        min_ratio,
        bound,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SeededRng;
    use crate::optim::{AdanHyper, AdanState};
    use crate::problems::Quadratic;
    use approx::assert_relative_eq;

    fn adan_trace(obj: &dyn Objective, hyper: AdanHyper, theta0: DenseVector, steps: usize) -> Vec<AdanTransition> {
        let mut s = AdanState::new(theta0, hyper).unwrap();
        (0..steps)
            .map(|_| {
                let g = obj.grad(&s.theta);
                s.step_transition(&g).unwrap()
            })
            .collect()
    }

    #[test]
    fn one_dimensional_equivalence() {
        let q = Quadratic::diagonal(vec![2.0]).unwrap();
        let r = check_agd_equivalence(&q, &DenseVector::from([1.0]), 0.1, 0.9, 100).unwrap();
        assert!(r.max_deviation <= 1e-10, "{r:?}");
        assert!(r.max_momentum_gap <= 1e-10, "{r:?}");
    }

    #[test]
    fn zero_momentum_and_single_step() {
        let q = Quadratic::diagonal(vec![1.0, 3.0, 5.0]).unwrap();
        let r = check_agd_equivalence(&q, &DenseVector::from([1.0, -2.0, 0.5]), 0.1, 0.0, 50).unwrap();
        assert_eq!(r.max_deviation, 0.0);
        let one = check_agd_equivalence(&q, &DenseVector::from([1.0, -2.0, 0.5]), 0.1, 0.7, 1).unwrap();
        // Same value by construction; the two forms only round differently.
        assert!(one.max_deviation <= 4.0 * f64::EPSILON, "{one:?}");
        assert!(check_agd_equivalence(&q, &DenseVector::zeros(3), 0.1, 0.5, 0).is_err());
    }

    #[test]
    fn prox_residual_detects_perturbation() {
        let mut rng = SeededRng::new(3);
        let q = Quadratic::log_spaced(8, 10.0, &mut rng).unwrap();
        let h = AdanHyper {
            lr: 0.01,
            decay_rate: 0.01,
            ..AdanHyper::default()
        };
        let mut trace = adan_trace(&q, h, DenseVector::filled(8, 1.0), 200);
        assert!(check_prox_residual(&trace).unwrap() <= 1e-10);
        let t = &mut trace[57];
        t.next_theta.as_mut_slice()[3] += 1e-3;
        let expected = 1e-3 * (1.0 + t.lr * t.lambda) / t.lr;
        let r = check_prox_residual(&trace).unwrap();
        assert_relative_eq!(r, expected, max_relative = 1e-6);
        assert!(check_prox_residual(&[]).is_err());
        trace[0].u = DenseVector::zeros(2);
        assert!(check_prox_residual(&trace).is_err());
    }

    #[test]
    fn prox_residual_collapsed_case() {
        let h = AdanHyper {
            beta1: 1.0,
            beta2: 0.0,
            beta3: 0.0,
            eps: 1.0,
            lr: 0.25,
            weight_decay: 0.0,
            debias: false,
            ..AdanHyper::default()
        };
        let q = Quadratic::diagonal(vec![1.0, 2.0]).unwrap();
        let trace = adan_trace(&q, h, DenseVector::from([1.0, -1.0]), 10);
        for t in &trace {
            let step = t.theta.sub(&t.next_theta).unwrap().scale(1.0 / t.lr);
            assert!(step.sub(&t.u).unwrap().linf() < 1e-15);
        }
        assert!(check_prox_residual(&trace).unwrap() < 1e-14);
    }

    #[test]
    fn premise_names_failed_bound() {
        let err = descent_premise(10.0, 1.0, 1.0, 0.0).unwrap_err().to_string();
        assert!(err.contains("eps/(3L)"), "{err}");
        let err = descent_premise(0.1, 1.0, 0.1, 2.0).unwrap_err().to_string();
        assert!(err.contains("1/(10 lambda)"), "{err}");
        assert!(descent_premise(0.01, 1.0, 1.0, 1.0).is_ok());

        let q = Quadratic::diagonal(vec![1.0, 4.0]).unwrap();
        let h = AdanHyper {
            lr: 10.0 / 4.0,
            eps: 1.0,
            ..AdanHyper::default()
        };
        let trace = adan_trace(&q, h, DenseVector::from([1.0, 1.0]), 3);
        assert!(matches!(check_descent_lemma(&q, &trace, 4.0, 0.02, 1.0), Err(Error::Premise(_))));
    }

    #[test]
    fn descent_holds_without_decay() {
        let q = Quadratic::diagonal(vec![1.0, 2.0, 4.0, 8.0]).unwrap();
        let theta0 = DenseVector::from([1.0, -1.0, 0.5, 0.25]);
        let c_inf = q.grad(&theta0).linf();
        let h = AdanHyper {
            lr: 1.0 / 24.0 / 2.0,
            eps: 1.0,
            weight_decay: 0.0,
            ..AdanHyper::default()
        };
        let trace = adan_trace(&q, h, theta0, 500);
        let r = check_descent_lemma(&q, &trace, 8.0, 0.0, c_inf).unwrap();
        assert!(r.violations.is_empty(), "{r:?}");
        assert_eq!(r.checked, 499);
    }

    #[test]
    fn schedule_and_ratio() {
        let q = Quadratic::diagonal(vec![1.0, 2.0]).unwrap();
        let h = AdanHyper {
            lr: 0.01,
            eps: 1.0,
            decay_rate: 0.05,
            ..AdanHyper::default()
        };
        let trace = adan_trace(&q, h, DenseVector::from([1.0, 1.0]), 100);
        assert!(check_lambda_schedule(&trace, 0.05).unwrap() < 1e-14);
        assert!(check_lambda_schedule(&trace, 0.04).unwrap() > 1e-3);
        let r = check_preconditioner_ratio(&trace, 0.05).unwrap();
        assert!(r.holds(), "{r:?}");
        assert!(check_lambda_schedule(&trace, 1.0).is_err());
        assert!(check_preconditioner_ratio(&trace[..1], 0.05).is_err());
    }
}
