use serde::{Deserialize, Serialize};

use crate::bench::{run, NoiseSpec, OptimizerSpec, ProblemSpec, RunConfig};
use crate::error::{Error, Result};
use crate::theory::{theorem_params, CertificateRecord};

/// How the first certified step `T*` is read off a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateMode {
    /// First `k` with `(1/(k+1))·Σ_{j≤k} S_j ≤ 4ε²`, seed-averaged.
    #[default]
    RunningAverage,
    /// First `k` with the seed-averaged `S_k ≤ 4ε²`.
    Instantaneous,
}

/// Fixed parts of a complexity sweep. Every run clips gradients
/// elementwise at `c_inf`, uses `μ = √2·β3·c_inf/ε` and no bias correction.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexitySetup {
    pub problem: ProblemSpec,
    pub problem_seed: u64,
    pub sigma: f64,
    pub c_inf: f64,
    pub eps: f64,
    pub beta3: f64,
    pub weight_decay: f64,
    pub seeds: Vec<u64>,
    /// Hard cap on steps per run; runs longer than this are censored.
    pub max_steps: u64,
    pub mode: CertificateMode,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityPoint {
    pub eps_target: f64,
    /// Horizon prescribed by [`theorem_params`].
    pub theorem_steps: u64,
    /// Steps actually run.
    pub horizon: u64,
    /// Number of steps until certification; `None` when censored.
    pub t_star: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityReport {
    pub points: Vec<ComplexityPoint>,
    /// Least-squares slope of `log T*` against `log(1/ε)` over the
    /// uncensored points; `None` with fewer than two of them.
    pub slope: Option<f64>,
    pub warnings: Vec<String>,
}

/// Sequence whose average the theorem bounds by `4ε²`; see
/// [`CertificateRecord::stationarity_measure`].
fn seed_mean_measure(traces: &[Vec<CertificateRecord>], k: usize) -> f64 {
    traces.iter().map(|t| t[k].stationarity_measure()).sum::<f64>() / traces.len() as f64
}

fn first_certified(traces: &[Vec<CertificateRecord>], eps_target: f64, mode: CertificateMode) -> Option<u64> {
    let len = traces.iter().map(Vec::len).min()?;
    let goal = 4.0 * eps_target * eps_target;
    let mut sum = 0.0;
    for k in 0..len {
        let s = seed_mean_measure(traces, k);
        sum += s;
        let value = match mode {
            CertificateMode::RunningAverage => sum / (k + 1) as f64,
            CertificateMode::Instantaneous => s,
        };
        if value <= goal {
            return Some(k as u64 + 1);
        }
    }
    None
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

/// For each target accuracy, run Adan with the theorem's schedule and record
/// the first step at which the stationarity certificate is met.
pub fn complexity_slope(setup: &ComplexitySetup, eps_list: &[f64]) -> Result<ComplexityReport> {
    let mut distinct = eps_list.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::Config(format!(
            "complexity sweep needs at least 3 distinct accuracies, got {}",
            distinct.len()
        )));
    }
    if setup.seeds.is_empty() {
        return Err(Error::Config("complexity sweep needs at least one seed".into()));
    }

    let placeholder = OptimizerSpec::Adan {
        lr: 1.0,
        beta1: 0.02,
        beta2: 0.08,
        beta3: setup.beta3,
        eps: setup.eps,
        weight_decay: setup.weight_decay,
        decay_rate: 0.0,
        decay_c_inf: None,
        debias: false,
        restart_period: None,
        clip_norm: None,
    };
    let mut base = RunConfig::new(setup.problem_seed, 1, setup.problem.clone(), placeholder);
    base.noise = if setup.sigma > 0.0 {
        NoiseSpec::Gaussian { sigma: setup.sigma }
    } else {
        NoiseSpec::Exact
    };
    base.clip = Some(setup.c_inf);
    base.seeds = setup.seeds.clone();
    base.certificates = true;
    let instance = base.instance()?;
    let objective = instance.problem.objective();
    let lipschitz = objective
        .lipschitz()
        .ok_or_else(|| Error::Config(format!("{} has no known Lipschitz constant", objective.name())))?;
    let f_star = objective
        .min_value()
        .ok_or_else(|| Error::Config(format!("{} has no known lower bound", objective.name())))?;
    // F_0(θ0) − f* with √n_0 ≤ √β3·c_inf.
    let delta0 = objective.loss(&instance.theta0) - f_star
        + 0.5 * setup.weight_decay * (setup.beta3.sqrt() * setup.c_inf + setup.eps) * instance.theta0.norm_sq();

    let mut points = Vec::new();
    let mut warnings = Vec::new();
    for &eps_target in eps_list {
        let p = theorem_params(eps_target, lipschitz, setup.sigma, delta0, setup.c_inf, setup.eps)?;
        let horizon = p.steps.min(setup.max_steps);
        let mut cfg = base.clone();
        cfg.steps = horizon;
        cfg.optimizer = OptimizerSpec::Adan {
            lr: p.eta,
            beta1: p.beta1,
            beta2: p.beta2,
            beta3: setup.beta3,
            eps: setup.eps,
            weight_decay: setup.weight_decay,
            decay_rate: 0.0,
            decay_c_inf: Some(setup.c_inf),
            debias: false,
            restart_period: None,
            clip_norm: None,
        };
        let traces: Vec<Vec<CertificateRecord>> = run(&cfg)?.into_iter().map(|t| t.certificates).collect();
        let t_star = first_certified(&traces, eps_target, setup.mode);
        if t_star.is_none() {
            warnings.push(format!(
                "eps = {eps_target}: certificate not met within {horizon} steps (theorem horizon {}); censored",
                p.steps
            ));
        }
        points.push(ComplexityPoint {
            eps_target,
            theorem_steps: p.steps,
            horizon,
            t_star,
        });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter_map(|p| p.t_star.map(|t| ((1.0 / p.eps_target).ln(), (t as f64).ln())))
        .unzip();
    Ok(ComplexityReport {
        slope: fit_slope(&xs, &ys),
        points,
        warnings,
    })
}
