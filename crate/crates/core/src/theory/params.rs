use crate::error::{domain, Result};

/// Step size, momentum weights and horizon that make the stationarity
/// bound `(1/(T+1))·Σ E‖u_k + λ_k·θ̃_k‖² ≤ ε²` hold.
///
/// With `c_l = 1/c_∞` and `c_u = 1/ε_adan` the conditions are
///
/// ```text
/// η² ≤ c_l·β1² / (8·c_u³·L²)
/// max{β1, β2} ≤ c_l·ε² / (96·c_u·σ²)
/// T ≥ max{ 24·Δ0 / (η·c_l·ε²), 24·c_u·σ² / (β1·c_l·ε²) }
/// ```
///
/// [`theorem_params`] takes each bound with equality (and the smallest
/// integer `T`). When `σ = 0` the β cap is vacuous and β1, β2 fall back to
/// the practical defaults 0.02 and 0.08.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremParams {
    pub eps_target: f64,
    pub lipschitz: f64,
    pub sigma: f64,
    pub delta0: f64,
    pub c_l: f64,
    pub c_u: f64,
    pub eta: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub steps: u64,
}

/// β values used when the noise-driven cap is vacuous.
pub const NOISELESS_BETAS: (f64, f64) = (0.02, 0.08);

/// The proof additionally needs `max{β1, β2} ≤ 2/3`.
const BETA_CEILING: f64 = 2.0 / 3.0;

pub fn theorem_params(
    eps_target: f64,
    lipschitz: f64,
    sigma: f64,
    delta0: f64,
    c_inf: f64,
    eps: f64,
) -> Result<TheoremParams> {
    for (name, value) in [
        ("target accuracy", eps_target),
        ("Lipschitz constant", lipschitz),
        ("c_inf", c_inf),
        ("eps", eps),
    ] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(domain(format!("{name} must be positive, got {value}")));
        }
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(domain(format!("sigma must be nonnegative, got {sigma}")));
    }
    if !(delta0 >= 0.0 && delta0.is_finite()) {
        return Err(domain(format!("initial gap must be nonnegative, got {delta0}")));
    }
    let c_l = 1.0 / c_inf;
    let c_u = 1.0 / eps;
    let e2 = eps_target * eps_target;
    let (beta1, beta2) = if sigma > 0.0 {
        let cap = (c_l * e2 / (96.0 * c_u * sigma * sigma)).min(BETA_CEILING);
        (cap, cap)
    } else {
        NOISELESS_BETAS
    };
    let eta = (c_l * beta1 * beta1 / (8.0 * c_u.powi(3) * lipschitz * lipschitz)).sqrt();
    let t_descent = 24.0 * delta0 / (eta * c_l * e2);
    let t_noise = 24.0 * c_u * sigma * sigma / (beta1 * c_l * e2);
    let steps = t_descent.max(t_noise).ceil().max(1.0) as u64;
    Ok(TheoremParams {
        eps_target,
        lipschitz,
        sigma,
        delta0,
        c_l,
        c_u,
        eta,
        beta1,
        beta2,
        steps,
    })
}

impl TheoremParams {
    /// Re-check the three displayed conditions with a relative slack.
    pub fn conditions_hold(&self) -> bool {
        let slack = 1.0 + 1e-12;
        let e2 = self.eps_target * self.eps_target;
        let eta_ok = self.eta * self.eta
            <= slack * self.c_l * self.beta1 * self.beta1
                / (8.0 * self.c_u.powi(3) * self.lipschitz * self.lipschitz);
        let beta_ok = self.sigma == 0.0
            || self.beta1.max(self.beta2) <= slack * self.c_l * e2 / (96.0 * self.c_u * self.sigma * self.sigma);
        let t = self.steps as f64;
        let t_ok = t * slack >= 24.0 * self.delta0 / (self.eta * self.c_l * e2)
            && t * slack >= 24.0 * self.c_u * self.sigma * self.sigma / (self.beta1 * self.c_l * e2);
        eta_ok && beta_ok && t_ok
    }

    /// The lemma premise `η ≤ min{ε/(3L), 1/(10λ)}` for a weight decay λ.
    pub fn satisfies_descent_premise(&self, weight_decay: f64) -> bool {
        let eps = 1.0 / self.c_u;
        self.eta <= eps / (3.0 * self.lipschitz) && (weight_decay == 0.0 || self.eta <= 1.0 / (10.0 * weight_decay))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_constants() {
        let p = theorem_params(0.5, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let beta = 0.25 / 96.0;
        assert_relative_eq!(p.beta1, beta, max_relative = 1e-15);
        assert_eq!(p.beta1, p.beta2);
        assert_relative_eq!(p.beta1, 2.604e-3, max_relative = 2e-4);
        assert_relative_eq!(p.eta, beta / (2.0 * 2.0_f64.sqrt()), max_relative = 1e-14);
        assert_relative_eq!(p.eta, 9.21e-4, max_relative = 1e-3);
        let t = (24.0 / (p.eta * 0.25)).max(24.0 / (beta * 0.25));
        assert_eq!(p.steps, t.ceil() as u64);
        assert_relative_eq!(p.steps as f64, 1.043e5, max_relative = 1e-3);
        assert!(p.conditions_hold());
    }

    #[test]
    fn noiseless_falls_back_to_defaults() {
        let p = theorem_params(0.1, 4.0, 0.0, 2.0, 2.0, 0.5).unwrap();
        assert_eq!((p.beta1, p.beta2), NOISELESS_BETAS);
        let c_l: f64 = 0.5;
        let c_u: f64 = 2.0;
        let eta = (c_l * 0.02 * 0.02 / (8.0 * c_u.powi(3) * 16.0)).sqrt();
        assert_relative_eq!(p.eta, eta, max_relative = 1e-15);
        assert!(p.conditions_hold());
    }

    #[test]
    fn doubling_accuracy_quarters_horizon() {
        // Fixed β (noiseless) isolates the ε⁻² dependence of T.
        let a = theorem_params(0.2, 1.0, 0.0, 5.0, 1.0, 1.0).unwrap();
        let b = theorem_params(0.4, 1.0, 0.0, 5.0, 1.0, 1.0).unwrap();
        assert_eq!(a.eta, b.eta);
        let ta = 24.0 * 5.0 / (a.eta * 0.04);
        let tb = 24.0 * 5.0 / (b.eta * 0.16);
        assert_relative_eq!(tb / ta, 0.25, max_relative = 1e-14);
        assert!((a.steps as f64 / b.steps as f64 - 4.0).abs() < 1e-3);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(theorem_params(0.0, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(theorem_params(0.5, -1.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(theorem_params(0.5, 1.0, -1.0, 1.0, 1.0, 1.0).is_err());
        assert!(theorem_params(0.5, 1.0, 1.0, -1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn beta_is_capped_for_tiny_noise() {
        let p = theorem_params(1.0, 1.0, 1e-6, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(p.beta1, 2.0 / 3.0);
        assert!(p.conditions_hold());
    }
}
