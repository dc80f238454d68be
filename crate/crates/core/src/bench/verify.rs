//! Named verification checks with configurable problem sizes.
//!
//! Each check builds its own runs, evaluates one of the theory checkers and
//! reports [`CheckLine`]s. Defaults finish in seconds; larger settings are
//! used by the acceptance suite.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bench::compare::Spread;
use crate::bench::config::{Instance, InitSpec, NoiseSpec, OptimizerSpec, ProblemSpec, RunConfig};
use crate::bench::run::{run, Trace};
use crate::error::{Error, Result};
use crate::linalg::{DenseVector, SeededRng};
use crate::optim::AdanTransition;
use crate::problems::{check_gradient, Dataset, Linear, Logistic, Mlp, Objective, Quadratic, Rosenbrock};
use crate::theory::{
    check_agd_equivalence, check_descent_lemma, check_lambda_schedule, check_moment_recursions,
    check_preconditioner_ratio, check_prox_residual, mean_averages, stationarity_certificate, theorem_params,
    CheckLine, CheckReport, CertificateRecord, RecursionSetup,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheckName {
    Equivalence,
    ProxResidual,
    DescentLemma,
    LambdaSchedule,
    PreconditionerRatio,
    MomentRecursions,
    Stationarity,
    Constants,
    Gradients,
}

impl CheckName {
    pub const ALL: [CheckName; 9] = [
        CheckName::Equivalence,
        CheckName::ProxResidual,
        CheckName::DescentLemma,
        CheckName::LambdaSchedule,
        CheckName::PreconditionerRatio,
        CheckName::MomentRecursions,
        CheckName::Stationarity,
        CheckName::Constants,
        CheckName::Gradients,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CheckName::Equivalence => "equivalence",
            CheckName::ProxResidual => "prox_residual",
            CheckName::DescentLemma => "descent_lemma",
            CheckName::LambdaSchedule => "lambda_schedule",
            CheckName::PreconditionerRatio => "preconditioner_ratio",
            CheckName::MomentRecursions => "moment_recursions",
            CheckName::Stationarity => "stationarity",
            CheckName::Constants => "constants",
            CheckName::Gradients => "gradients",
        }
    }
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckName::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| {
                let known: Vec<&str> = CheckName::ALL.iter().map(CheckName::as_str).collect();
                Error::Config(format!("unknown check {s:?}; known checks: {}", known.join(", ")))
            })
    }
}

/// Random AGD / AGD-II comparisons over quadratics and 2-D Rosenbrock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquivalenceSettings {
    pub cases: usize,
    pub steps: usize,
    pub tolerance: f64,
}

impl Default for EquivalenceSettings {
    fn default() -> Self {
        EquivalenceSettings {
            cases: 10,
            steps: 500,
            tolerance: 1e-8,
        }
    }
}

/// The full-batch quadratic run shared by the prox, descent, schedule and
/// ratio checks. The step is `η = ½·min{ε/(3L), 1/(10λ)}`, gradients are
/// clipped at `c_∞ = ‖∇f(θ0)‖∞` and `μ = √2·β3·c_∞/ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LemmaSettings {
    pub dim: usize,
    pub kappa: f64,
    pub steps: u64,
    pub weight_decay: f64,
    pub eps: f64,
    pub debias: bool,
    pub prox_tolerance: f64,
    /// Relative tolerance of the λ-schedule identity.
    pub schedule_tolerance: f64,
}

impl Default for LemmaSettings {
    fn default() -> Self {
        LemmaSettings {
            dim: 64,
            kappa: 10.0,
            steps: 2000,
            weight_decay: 0.02,
            eps: 1.0,
            debias: true,
            prox_tolerance: 1e-10,
            schedule_tolerance: 16.0 * f64::EPSILON,
        }
    }
}

/// Multi-seed noisy quadratic runs for the moment recursions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecursionSettings {
    pub dim: usize,
    pub kappa: f64,
    pub sigma: f64,
    pub seeds: usize,
    pub steps: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
}

impl Default for RecursionSettings {
    fn default() -> Self {
        RecursionSettings {
            dim: 16,
            kappa: 10.0,
            sigma: 1.0,
            seeds: 20,
            steps: 300,
            lr: 0.05,
            beta1: 0.02,
            beta2: 0.08,
        }
    }
}

/// Adan under the theorem's schedule on noisy logistic regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StationaritySettings {
    pub samples: usize,
    pub dim: usize,
    pub sigma: f64,
    pub eps_target: f64,
    pub c_inf: f64,
    pub eps: f64,
    pub beta3: f64,
    pub weight_decay: f64,
    pub seeds: usize,
    /// Allowed factor over the theorem's bounds.
    pub factor: f64,
}

impl Default for StationaritySettings {
    fn default() -> Self {
        StationaritySettings {
            samples: 128,
            dim: 10,
            sigma: 1.0,
            eps_target: 0.5,
            c_inf: 2.0,
            eps: 1.0,
            beta3: 0.01,
            weight_decay: 0.02,
            seeds: 2,
            factor: 1.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantsSettings {
    pub steps: u64,
    /// Soft target for `c_2/c_∞` on the MLP; reported, never gating.
    pub mlp_ratio: f64,
}

impl Default for ConstantsSettings {
    fn default() -> Self {
        ConstantsSettings {
            steps: 300,
            mlp_ratio: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GradientSettings {
    pub points: usize,
    pub tolerance: f64,
}

impl Default for GradientSettings {
    fn default() -> Self {
        GradientSettings {
            points: 20,
            tolerance: 1e-5,
        }
    }
}

/// Deliberate corruption of the recorded lemma run, to confirm detection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultInjection {
    /// Added to the first coordinate of `θ_{k+1}` at step `step`.
    pub prox_perturbation: f64,
    #[serde(default = "default_fault_step")]
    pub step: usize,
}

fn default_fault_step() -> usize {
    100
}

/// Everything `verify` needs: which checks to run and their sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Check names to run, in order; empty means all.
    pub checks: Vec<String>,
    pub equivalence: EquivalenceSettings,
    pub lemma: LemmaSettings,
    pub recursions: RecursionSettings,
    pub stationarity: StationaritySettings,
    pub constants: ConstantsSettings,
    pub gradients: GradientSettings,
    pub fault: Option<FaultInjection>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 1,
            checks: Vec::new(),
            equivalence: EquivalenceSettings::default(),
            lemma: LemmaSettings::default(),
            recursions: RecursionSettings::default(),
            stationarity: StationaritySettings::default(),
            constants: ConstantsSettings::default(),
            gradients: GradientSettings::default(),
            fault: None,
        }
    }
}

impl VerifyConfig {
    /// Resolve and validate the check list before anything runs.
    pub fn selected(&self) -> Result<Vec<CheckName>> {
        if self.checks.is_empty() {
            return Ok(CheckName::ALL.to_vec());
        }
        let mut out = Vec::new();
        for name in &self.checks {
            let c: CheckName = name.parse()?;
            if out.contains(&c) {
                return Err(Error::Config(format!("check {name:?} listed twice")));
            }
            out.push(c);
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        self.selected()?;
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        let e = &self.equivalence;
        if e.cases == 0 || e.steps == 0 {
            return bad("equivalence needs cases and steps >= 1");
        }
        let l = &self.lemma;
        if l.dim == 0 || l.steps < 2 || !(l.kappa >= 1.0) || !(l.eps > 0.0) || !(l.weight_decay >= 0.0) {
            return bad("lemma needs dim >= 1, steps >= 2, kappa >= 1, eps > 0, weight_decay >= 0");
        }
        let r = &self.recursions;
        if r.seeds < crate::theory::MIN_SEEDS {
            return Err(Error::Config(format!(
                "recursions.seeds must be at least {}",
                crate::theory::MIN_SEEDS
            )));
        }
        if r.dim == 0 || r.steps < 2 || !(r.sigma >= 0.0) || !(r.lr > 0.0) {
            return bad("recursions need dim >= 1, steps >= 2, sigma >= 0, lr > 0");
        }
        let s = &self.stationarity;
        if s.samples == 0 || s.dim == 0 || s.seeds == 0 || !(s.eps_target > 0.0) || !(s.c_inf > 0.0) || !(s.eps > 0.0) {
            return bad("stationarity needs positive samples, dim, seeds, eps_target, c_inf and eps");
        }
        if self.constants.steps == 0 {
            return bad("constants.steps must be at least 1");
        }
        if self.gradients.points == 0 {
            return bad("gradients.points must be at least 1");
        }
        if let Some(f) = &self.fault {
            if !f.prox_perturbation.is_finite() || f.step >= l.steps as usize {
                return bad("fault.step must lie inside the lemma run and the perturbation be finite");
            }
        }
        Ok(())
    }
}

/// Run the selected checks in order.
pub fn verify(config: &VerifyConfig) -> Result<CheckReport> {
    config.validate()?;
    let selected = config.selected()?;
    let mut report = CheckReport::default();
    let needs_lemma = selected.iter().any(|c| {
        matches!(
            c,
            CheckName::ProxResidual | CheckName::DescentLemma | CheckName::LambdaSchedule | CheckName::PreconditionerRatio
        )
    });
    let lemma = if needs_lemma {
        Some(lemma_run(config.seed, &config.lemma, config.fault.as_ref())?)
    } else {
        None
    };
    for check in selected {
        let lines = match check {
            CheckName::Equivalence => equivalence_check(config.seed, &config.equivalence)?,
            CheckName::ProxResidual => lemma.as_ref().expect("lemma run").prox_lines(&config.lemma)?,
            CheckName::DescentLemma => lemma.as_ref().expect("lemma run").descent_lines()?,
            CheckName::LambdaSchedule => lemma.as_ref().expect("lemma run").schedule_lines(&config.lemma)?,
            CheckName::PreconditionerRatio => lemma.as_ref().expect("lemma run").ratio_lines()?,
            CheckName::MomentRecursions => recursion_check(config.seed, &config.recursions)?,
            CheckName::Stationarity => stationarity_check(config.seed, &config.stationarity)?,
            CheckName::Constants => constants_check(config.seed, &config.constants)?,
            CheckName::Gradients => gradient_check(config.seed, &config.gradients)?,
        };
        report.extend(lines);
    }
    Ok(report)
}

fn single(line: CheckLine) -> CheckReport {
    CheckReport { lines: vec![line] }
}

pub fn equivalence_check(seed: u64, s: &EquivalenceSettings) -> Result<CheckReport> {
    let mut rng = SeededRng::new(seed).fork(10);
    let mut worst = 0.0_f64;
    for case in 0..s.cases {
        let alpha = rng.uniform(0.0, 0.9);
        let report = if case % 2 == 0 {
            let d = 1 + rng.index(20);
            let kappa = 10f64.powf(rng.uniform(0.0, 2.0));
            let q = Quadratic::log_spaced(d, kappa, &mut rng)?;
            let eta = rng.uniform(0.05, 0.5) / kappa;
            let theta0 = rng.uniform_vector(d, -2.0, 2.0);
            check_agd_equivalence(&q, &theta0, eta, alpha, s.steps)?
        } else {
            let r = Rosenbrock::new(2)?;
            let theta0 = DenseVector::from(vec![-1.2 + rng.uniform(-0.3, 0.3), 1.0 + rng.uniform(-0.3, 0.3)]);
            let eta = rng.uniform(1e-4, 4e-4);
            check_agd_equivalence(&r, &theta0, eta, alpha, s.steps)?
        };
        worst = worst.max(report.max_deviation).max(report.max_momentum_gap);
    }
    Ok(single(CheckLine::at_most("equivalence_max_deviation", worst, s.tolerance)))
}

/// The recorded lemma run plus the constants it was built from.
#[derive(Debug, Clone)]
pub struct LemmaRun {
    pub instance: Instance,
    pub lipschitz: f64,
    pub c_inf: f64,
    pub decay_rate: f64,
    pub weight_decay: f64,
    pub transitions: Vec<AdanTransition>,
    pub trace: Trace,
}

pub fn lemma_config(seed: u64, s: &LemmaSettings) -> Result<(RunConfig, f64, f64)> {
    let problem = ProblemSpec::Quadratic {
        dim: s.dim,
        kappa: s.kappa,
    };
    let lipschitz = s.kappa;
    let eta = 0.5 * (s.eps / (3.0 * lipschitz)).min(if s.weight_decay > 0.0 {
        1.0 / (10.0 * s.weight_decay)
    } else {
        f64::INFINITY
    });
    let spec = |c_inf: Option<f64>| OptimizerSpec::Adan {
        lr: eta,
        beta1: 0.02,
        beta2: 0.08,
        beta3: 0.01,
        eps: s.eps,
        weight_decay: s.weight_decay,
        decay_rate: 0.0,
        decay_c_inf: c_inf,
        debias: s.debias,
        restart_period: None,
        clip_norm: None,
    };
    let mut cfg = RunConfig::new(seed, s.steps, problem, spec(None));
    let inst = cfg.instance()?;
    let c_inf = inst.problem.grad(&inst.theta0).linf();
    cfg.optimizer = spec(Some(c_inf));
    cfg.clip = Some(c_inf);
    cfg.keep_transitions = true;
    Ok((cfg, lipschitz, c_inf))
}

pub fn lemma_run(seed: u64, s: &LemmaSettings, fault: Option<&FaultInjection>) -> Result<LemmaRun> {
    let (cfg, lipschitz, c_inf) = lemma_config(seed, s)?;
    let decay_rate = cfg.optimizer.adan_hyper().expect("adan")?.decay_rate;
    let instance = cfg.instance()?;
    let mut trace = run(&cfg)?.remove(0);
    let mut transitions = std::mem::take(&mut trace.transitions);
    if let Some(f) = fault {
        let t = &mut transitions[f.step];
        t.next_theta.as_mut_slice()[0] += f.prox_perturbation;
    }
    Ok(LemmaRun {
        instance,
        lipschitz,
        c_inf,
        decay_rate,
        weight_decay: s.weight_decay,
        transitions,
        trace,
    })
}

impl LemmaRun {
    pub fn prox_lines(&self, s: &LemmaSettings) -> Result<CheckReport> {
        let r = check_prox_residual(&self.transitions)?;
        Ok(single(CheckLine::at_most("prox_residual", r, s.prox_tolerance)))
    }

    pub fn descent_lines(&self) -> Result<CheckReport> {
        // A corrupted θ_{k+1} breaks contiguity; compare against the stored
        // successor so the corruption shows up as a violation instead.
        let mut transitions = self.transitions.clone();
        for i in 1..transitions.len() {
            let next = transitions[i - 1].next_theta.clone();
            transitions[i].theta = next;
        }
        let r = check_descent_lemma(self.instance.problem.objective(), &transitions, self.lipschitz, self.weight_decay, self.c_inf)?;
        Ok(single(CheckLine::at_most("descent_lemma_violations", r.violations.len() as f64, 0.0)))
    }

    pub fn schedule_lines(&self, s: &LemmaSettings) -> Result<CheckReport> {
        let r = check_lambda_schedule(&self.transitions, self.decay_rate)?;
        Ok(single(CheckLine::at_most("lambda_schedule_rel_error", r, s.schedule_tolerance)))
    }

    pub fn ratio_lines(&self) -> Result<CheckReport> {
        let r = check_preconditioner_ratio(&self.transitions, self.decay_rate)?;
        Ok(single(CheckLine::at_least("preconditioner_ratio_min", r.min_ratio, r.bound)))
    }
}

pub fn recursion_traces(seed: u64, s: &RecursionSettings) -> Result<Vec<Vec<CertificateRecord>>> {
    let mut cfg = RunConfig::new(
        seed,
        s.steps,
        ProblemSpec::Quadratic {
            dim: s.dim,
            kappa: s.kappa,
        },
        OptimizerSpec::Adan {
            lr: s.lr,
            beta1: s.beta1,
            beta2: s.beta2,
            beta3: 0.01,
            eps: 1.0,
            weight_decay: 0.0,
            decay_rate: 0.0,
            decay_c_inf: None,
            debias: false,
            restart_period: None,
            clip_norm: None,
        },
    );
    cfg.noise = NoiseSpec::Gaussian { sigma: s.sigma };
    cfg.seeds = (0..s.seeds as u64).map(|i| seed.wrapping_mul(1000).wrapping_add(i)).collect();
    cfg.certificates = true;
    Ok(run(&cfg)?.into_iter().map(|t| t.certificates).collect())
}

pub fn recursion_check(seed: u64, s: &RecursionSettings) -> Result<CheckReport> {
    let traces = recursion_traces(seed, s)?;
    let r = check_moment_recursions(
        &traces,
        RecursionSetup {
            beta1: s.beta1,
            beta2: s.beta2,
            lipschitz: s.kappa,
            sigma: s.sigma,
        },
    )?;
    Ok(CheckReport {
        lines: vec![
            CheckLine::at_least("moment_recursion_m_margin", r.mk_worst, 0.0),
            CheckLine::at_least("moment_recursion_v_margin", r.vk_worst, 0.0),
        ],
    })
}

/// Per-seed traces of the stationarity experiment plus the horizon `T`.
pub fn stationarity_traces(seed: u64, s: &StationaritySettings) -> Result<(Vec<Trace>, u64)> {
    let problem = ProblemSpec::Logistic {
        samples: s.samples,
        dim: s.dim,
        l2: 0.0,
    };
    let adan = |lr: f64, beta1: f64, beta2: f64| OptimizerSpec::Adan {
        lr,
        beta1,
        beta2,
        beta3: s.beta3,
        eps: s.eps,
        weight_decay: s.weight_decay,
        decay_rate: 0.0,
        decay_c_inf: Some(s.c_inf),
        debias: false,
        restart_period: None,
        clip_norm: None,
    };
    let mut cfg = RunConfig::new(seed, 1, problem, adan(1e-3, 0.02, 0.08));
    cfg.noise = NoiseSpec::Gaussian { sigma: s.sigma };
    cfg.clip = Some(s.c_inf);
    cfg.init = InitSpec::Zeros;
    cfg.certificates = true;
    cfg.seeds = (1..=s.seeds as u64).collect();
    let inst = cfg.instance()?;
    let obj = inst.problem.objective();
    let lipschitz = obj.lipschitz().expect("logistic knows its smoothness");
    // Cross-entropy is nonnegative and θ0 = 0 carries no decay term.
    let delta0 = obj.loss(&inst.theta0) - obj.min_value().unwrap_or(0.0);
    let p = theorem_params(s.eps_target, lipschitz, s.sigma, delta0, s.c_inf, s.eps)?;
    cfg.optimizer = adan(p.eta, p.beta1, p.beta2);
    cfg.steps = p.steps + 1;
    Ok((run(&cfg)?, p.steps))
}

pub fn stationarity_check(seed: u64, s: &StationaritySettings) -> Result<CheckReport> {
    let (traces, horizon) = stationarity_traces(seed, s)?;
    let per_seed = traces
        .iter()
        .map(|t| stationarity_certificate(&t.certificates, horizon))
        .collect::<Result<Vec<_>>>()?;
    let avg = mean_averages(&per_seed)?;
    let e2 = s.eps_target * s.eps_target;
    Ok(CheckReport {
        lines: vec![
            CheckLine::at_most("stationarity_avg_u", avg.avg_u, s.factor * e2),
            CheckLine::at_most("stationarity_avg_m_err", avg.avg_m_err, s.factor * e2 / 4.0),
            CheckLine::at_most("stationarity_avg_v", avg.avg_v, s.factor * e2 / 4.0),
        ],
    })
}

/// Short default-Adan runs on every problem family.
pub fn constants_runs(seed: u64, steps: u64) -> Result<Vec<(String, Trace)>> {
    let adan = OptimizerSpec::Adan {
        lr: 0.01,
        beta1: 0.02,
        beta2: 0.08,
        beta3: 0.01,
        eps: 1e-8,
        weight_decay: 0.02,
        decay_rate: 0.0,
        decay_c_inf: None,
        debias: true,
        restart_period: None,
        clip_norm: None,
    };
    let problems = [
        ("quadratic", ProblemSpec::Quadratic { dim: 32, kappa: 100.0 }, NoiseSpec::Gaussian { sigma: 0.1 }),
        ("rosenbrock", ProblemSpec::Rosenbrock { dim: 2 }, NoiseSpec::Gaussian { sigma: 0.1 }),
        (
            "logistic",
            ProblemSpec::Logistic {
                samples: 512,
                dim: 20,
                l2: 0.0,
            },
            NoiseSpec::Minibatch { batch: 16 },
        ),
        (
            "mlp",
            ProblemSpec::Mlp {
                samples: 256,
                input: 16,
                hidden: 32,
            },
            NoiseSpec::Minibatch { batch: 16 },
        ),
    ];
    let mut out = Vec::new();
    for (name, problem, noise) in problems {
        let mut cfg = RunConfig::new(seed, steps, problem, adan.clone());
        cfg.noise = noise;
        out.push((name.to_string(), run(&cfg)?.remove(0)));
    }
    Ok(out)
}

pub fn constants_check(seed: u64, s: &ConstantsSettings) -> Result<CheckReport> {
    let mut report = CheckReport::default();
    let mut worst_upper = 0.0_f64;
    let mut worst_lower = 0.0_f64;
    let mut mlp_ratio = None;
    for (name, trace) in constants_runs(seed, s.steps)? {
        let c = trace.constants()?;
        worst_upper = worst_upper.max(c.c_2 / ((c.dim as f64).sqrt() * c.c_inf));
        worst_lower = worst_lower.max(c.c_inf / c.c_2);
        if name == "mlp" {
            mlp_ratio = Some(c.l2_to_linf_ratio());
        }
    }
    let tol = 1.0 + 1e-12;
    report.push(CheckLine::at_most("constants_c2_over_sqrt_d_cinf", worst_upper, tol));
    report.push(CheckLine::at_most("constants_cinf_over_c2", worst_lower, tol));
    if let Some(r) = mlp_ratio {
        report.push(CheckLine::at_least("constants_mlp_c2_over_cinf", r, s.mlp_ratio).soft());
    }
    Ok(report)
}

/// Every objective family at `points` random locations.
pub fn gradient_check(seed: u64, s: &GradientSettings) -> Result<CheckReport> {
    let mut rng = SeededRng::new(seed).fork(20);
    let data = Dataset::synthetic(64, 6, seed);
    let objectives: Vec<Box<dyn Objective>> = vec![
        Box::new(Quadratic::log_spaced(12, 50.0, &mut rng)?),
        Box::new(Rosenbrock::new(4)?),
        Box::new(Logistic::new(data.clone(), 0.01)?),
        Box::new(Mlp::new(&[6, 5, 1], data)?),
        Box::new(Linear::new(rng.normal_vector(7, 1.0), 0.5)),
    ];
    let mut report = CheckReport::default();
    for obj in &objectives {
        let mut worst = 0.0_f64;
        for _ in 0..s.points {
            let theta = rng.uniform_vector(obj.dim(), -1.5, 1.5);
            worst = worst.max(check_gradient(obj.as_ref(), &theta).max_rel_error);
        }
        report.push(CheckLine::at_most(format!("gradient_{}", obj.name()), worst, s.tolerance));
    }
    Ok(report)
}

/// Median final loss over seeds of each trace list.
pub fn median_final_loss(traces: &[Trace]) -> Result<f64> {
    let losses: Vec<f64> = traces.iter().map(|t| t.final_loss).collect();
    Ok(Spread::of(&losses)?.median)
}
