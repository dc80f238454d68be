use crate::error::{domain, Error, Result};
use crate::theory::CertificateRecord;

/// Minimum number of independent seeds for the Monte-Carlo recursion check.
pub const MIN_SEEDS: usize = 20;

/// Standard errors of slack granted to the seed average.
pub const SE_SLACK: f64 = 3.0;

/// Constants of the two moment recursions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecursionSetup {
    pub beta1: f64,
    pub beta2: f64,
    pub lipschitz: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecursionReport {
    pub mk_ok: bool,
    pub vk_ok: bool,
    /// Smallest `(mean margin + 3·SE)` over steps; negative means a failure.
    pub mk_worst: f64,
    pub vk_worst: f64,
    pub steps_checked: usize,
}

/// Check, at every `k`, the expectation bounds
///
/// ```text
/// E‖m_{k+1} − G_{k+1}‖² ≤ (1−β1)·E‖m_k − G_k‖² + (1−β1)²L²/β1·E‖θ_{k+1}−θ_k‖² + β1²σ²
/// E‖v_{k+1}‖²           ≤ (1−β2)·E‖v_k‖² + 2β2·E‖G_{k+1}−G_k‖² + 3β2²σ²
/// ```
///
/// with `G_k = ∇f(θ_k)`. Each seed contributes the paired margin
/// `RHS − LHS`; the bound is accepted at step `k` when the mean margin is at
/// least `−3` standard errors.
pub fn check_moment_recursions(traces: &[Vec<CertificateRecord>], setup: RecursionSetup) -> Result<RecursionReport> {
    if traces.len() < MIN_SEEDS {
        return Err(Error::Insufficient(format!(
            "moment recursions need at least {MIN_SEEDS} seeds, got {}",
            traces.len()
        )));
    }
    let RecursionSetup {
        beta1,
        beta2,
        lipschitz,
        sigma,
    } = setup;
    if !(beta1 > 0.0 && beta1 <= 1.0) || !(0.0..=1.0).contains(&beta2) {
        return Err(domain(format!("betas out of range: ({beta1}, {beta2})")));
    }
    if !(lipschitz >= 0.0) || !(sigma >= 0.0) {
        return Err(domain("Lipschitz constant and sigma must be nonnegative"));
    }
    let len = traces.iter().map(Vec::len).min().unwrap_or(0);
    if len < 2 {
        return Err(Error::Insufficient("recursions need at least two records per seed".into()));
    }
    let s2 = sigma * sigma;
    let step_coeff = (1.0 - beta1).powi(2) * lipschitz * lipschitz / beta1;
    let mut mk_worst = f64::INFINITY;
    let mut vk_worst = f64::INFINITY;
    let mut dm = Vec::with_capacity(traces.len());
    let mut dv = Vec::with_capacity(traces.len());
    for k in 0..len - 1 {
        dm.clear();
        dv.clear();
        for trace in traces {
            let (now, next) = (&trace[k], &trace[k + 1]);
            let change = now.full_grad_change_sq.ok_or_else(|| {
                Error::Insufficient(format!("record {k} lacks the full-gradient change"))
            })?;
            dm.push((1.0 - beta1) * now.m_err_sq + step_coeff * now.step_sq + beta1 * beta1 * s2 - next.m_err_sq);
            dv.push((1.0 - beta2) * now.v_sq + 2.0 * beta2 * change + 3.0 * beta2 * beta2 * s2 - next.v_sq);
        }
        mk_worst = mk_worst.min(slackened_mean(&dm));
        vk_worst = vk_worst.min(slackened_mean(&dv));
    }
    Ok(RecursionReport {
        mk_ok: mk_worst >= 0.0,
        vk_ok: vk_worst >= 0.0,
        mk_worst,
        vk_worst,
        steps_checked: len - 1,
    })
}

/// Mean plus `SE_SLACK` standard errors, with a rounding allowance scaled
/// to the magnitudes involved.
fn slackened_mean(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let scale = xs.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    mean + SE_SLACK * (var / n).sqrt() + 1e-12 * scale.max(1e-300)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseVector;
    use crate::optim::{AdanHyper, AdanState};

    fn stationary_traces(beta1: f64, beta2: f64, seeds: usize, steps: usize) -> Vec<Vec<CertificateRecord>> {
        // Tiny step so θ is effectively frozen and the gradient constant.
        let g = DenseVector::from([0.3, -1.2, 0.8]);
        let h = AdanHyper {
            beta1,
            beta2,
            lr: 1e-300,
            weight_decay: 0.0,
            debias: false,
            ..AdanHyper::default()
        };
        (0..seeds)
            .map(|_| {
                let mut s = AdanState::new(DenseVector::zeros(3), h).unwrap();
                (0..steps)
                    .map(|_| {
                        let t = s.step_transition(&g).unwrap();
                        let mut r = CertificateRecord::from_transition(&t, 0.0, &g).unwrap();
                        r.full_grad_change_sq = Some(0.0);
                        r
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn ema_decay_matches_closed_form_and_bound() {
        let beta1 = 0.1;
        let traces = stationary_traces(beta1, 0.08, 20, 40);
        let g2 = 0.09 + 1.44 + 0.64;
        for (k, r) in traces[0].iter().enumerate() {
            let expected = (1.0 - beta1).powi(2 * (k as i32 + 1)) * g2;
            assert!((r.m_err_sq - expected).abs() <= 1e-12 * g2);
        }
        let setup = RecursionSetup {
            beta1,
            beta2: 0.08,
            lipschitz: 1.0,
            sigma: 0.0,
        };
        let rep = check_moment_recursions(&traces, setup).unwrap();
        assert!(rep.mk_ok && rep.vk_ok, "{rep:?}");
        assert!(rep.mk_worst > 0.0);
        assert_eq!(rep.steps_checked, 39);
    }

    #[test]
    fn requires_enough_seeds() {
        let traces = stationary_traces(0.1, 0.1, 19, 5);
        let setup = RecursionSetup {
            beta1: 0.1,
            beta2: 0.1,
            lipschitz: 1.0,
            sigma: 0.0,
        };
        assert!(matches!(check_moment_recursions(&traces, setup), Err(Error::Insufficient(_))));
    }

    #[test]
    fn tampered_moment_fails() {
        let mut traces = stationary_traces(0.1, 0.1, 20, 10);
        for t in &mut traces {
            t[5].m_err_sq *= 10.0;
        }
        let setup = RecursionSetup {
            beta1: 0.1,
            beta2: 0.1,
            lipschitz: 1.0,
            sigma: 0.0,
        };
        let rep = check_moment_recursions(&traces, setup).unwrap();
        assert!(!rep.mk_ok);
        assert!(rep.vk_ok);
    }
}
