use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{DenseVector, SeededRng};
use crate::optim::{AdamWHyper, AdanHyper};
use crate::problems::{Dataset, Logistic, Mlp, NoiseModel, Problem, Quadratic, Rosenbrock};

/// Test objective, generated deterministically from [`RunConfig::seed`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    /// Diagonal quadratic with eigenvalues log-spaced over `[1, kappa]`.
    Quadratic { dim: usize, kappa: f64 },
    Rosenbrock { dim: usize },
    /// Logistic regression on a synthetic teacher dataset.
    Logistic {
        samples: usize,
        dim: usize,
        #[serde(default)]
        l2: f64,
    },
    /// One-hidden-layer tanh network on a synthetic dataset.
    Mlp { samples: usize, input: usize, hidden: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSpec {
    #[default]
    Exact,
    Gaussian {
        sigma: f64,
    },
    Minibatch {
        batch: usize,
    },
}

impl From<NoiseSpec> for NoiseModel {
    fn from(n: NoiseSpec) -> Self {
        match n {
            NoiseSpec::Exact => NoiseModel::Exact,
            NoiseSpec::Gaussian { sigma } => NoiseModel::Gaussian { sigma },
            NoiseSpec::Minibatch { batch } => NoiseModel::Minibatch { batch },
        }
    }
}

/// Starting point. `Auto` picks the customary start for each problem:
/// `(−1.2, 1, …)` for Rosenbrock, fan-in scaled weights for the MLP, and
/// `U(−1, 1)` coordinates otherwise.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitSpec {
    #[default]
    Auto,
    Zeros,
    Constant {
        value: f64,
    },
    Uniform {
        radius: f64,
    },
    Point {
        values: Vec<f64>,
    },
}

fn default_true() -> bool {
    true
}

mod defaults {
    pub fn adan_beta1() -> f64 {
        0.02
    }
    pub fn adan_beta2() -> f64 {
        0.08
    }
    pub fn adan_beta3() -> f64 {
        0.01
    }
    pub fn eps() -> f64 {
        1e-8
    }
    pub fn adan_wd() -> f64 {
        0.02
    }
    pub fn adam_beta1() -> f64 {
        0.9
    }
    pub fn adam_beta2() -> f64 {
        0.999
    }
    pub fn momentum() -> f64 {
        0.9
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OptimizerSpec {
    Adan {
        lr: f64,
        #[serde(default = "defaults::adan_beta1")]
        beta1: f64,
        #[serde(default = "defaults::adan_beta2")]
        beta2: f64,
        #[serde(default = "defaults::adan_beta3")]
        beta3: f64,
        #[serde(default = "defaults::eps")]
        eps: f64,
        #[serde(default = "defaults::adan_wd")]
        weight_decay: f64,
        /// Fixed decay rate μ of the weight decay.
        #[serde(default)]
        decay_rate: f64,
        /// When set, `μ = √2·β3·c_inf/ε` replaces `decay_rate`.
        #[serde(default)]
        decay_c_inf: Option<f64>,
        #[serde(default = "default_true")]
        debias: bool,
        #[serde(default)]
        restart_period: Option<u64>,
        #[serde(default)]
        clip_norm: Option<f64>,
    },
    /// Adam with decoupled weight decay; `weight_decay = 0` is plain Adam.
    #[serde(alias = "adam")]
    Adamw {
        lr: f64,
        #[serde(default = "defaults::adam_beta1")]
        beta1: f64,
        #[serde(default = "defaults::adam_beta2")]
        beta2: f64,
        #[serde(default = "defaults::eps")]
        eps: f64,
        #[serde(default)]
        weight_decay: f64,
        #[serde(default = "default_true")]
        debias: bool,
    },
    Sgdm {
        lr: f64,
        #[serde(default = "defaults::momentum")]
        momentum: f64,
    },
    Agd {
        lr: f64,
        #[serde(default = "defaults::momentum")]
        alpha: f64,
    },
}

impl OptimizerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            OptimizerSpec::Adan { .. } => "adan",
            OptimizerSpec::Adamw { .. } => "adamw",
            OptimizerSpec::Sgdm { .. } => "sgdm",
            OptimizerSpec::Agd { .. } => "agd",
        }
    }

    pub fn lr(&self) -> f64 {
        match *self {
            OptimizerSpec::Adan { lr, .. }
            | OptimizerSpec::Adamw { lr, .. }
            | OptimizerSpec::Sgdm { lr, .. }
            | OptimizerSpec::Agd { lr, .. } => lr,
        }
    }

    pub fn with_lr(&self, new_lr: f64) -> OptimizerSpec {
        let mut out = self.clone();
        match &mut out {
            OptimizerSpec::Adan { lr, .. }
            | OptimizerSpec::Adamw { lr, .. }
            | OptimizerSpec::Sgdm { lr, .. }
            | OptimizerSpec::Agd { lr, .. } => *lr = new_lr,
        }
        out
    }

    /// Adan hyperparameters with the decay rate resolved.
    pub fn adan_hyper(&self) -> Option<Result<AdanHyper>> {
        let OptimizerSpec::Adan {
            lr,
            beta1,
            beta2,
            beta3,
            eps,
            weight_decay,
            decay_rate,
            decay_c_inf,
            debias,
            restart_period,
            clip_norm,
        } = *self
        else {
            return None;
        };
        let mut h = AdanHyper {
            beta1,
            beta2,
            beta3,
            eps,
            lr,
            weight_decay,
            decay_rate,
            debias,
            restart_period,
            clip_norm,
        };
        if let Some(c) = decay_c_inf {
            if !(c > 0.0) {
                return Some(Err(Error::Config(format!("optimizer.decay_c_inf must be positive, got {c}"))));
            }
            h.decay_rate = h.theorem_decay_rate(c);
        }
        Some(h.validate().map(|_| h).map_err(|e| Error::Config(format!("optimizer: {e}"))))
    }

    pub(crate) fn adamw_hyper(&self) -> Option<AdamWHyper> {
        match *self {
            OptimizerSpec::Adamw {
                lr,
                beta1,
                beta2,
                eps,
                weight_decay,
                debias,
            } => Some(AdamWHyper {
                lr,
                beta1,
                beta2,
                eps,
                weight_decay,
                debias,
            }),
            _ => None,
        }
    }
}

/// One experiment: a problem, an optimizer and a step budget, repeated
/// over `seeds`. `seed` fixes the problem instance and starting point;
/// each entry of `seeds` drives the gradient noise of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub label: Option<String>,
    pub seed: u64,
    #[serde(default)]
    pub seeds: Vec<u64>,
    pub steps: u64,
    pub problem: ProblemSpec,
    #[serde(default)]
    pub noise: NoiseSpec,
    /// Elementwise clip `c_∞` applied to every sampled gradient.
    #[serde(default)]
    pub clip: Option<f64>,
    #[serde(default)]
    pub init: InitSpec,
    pub optimizer: OptimizerSpec,
    /// Record certificate quantities (Adan only; costs a full gradient per
    /// step under minibatch noise).
    #[serde(default)]
    pub certificates: bool,
    /// Keep every Adan transition in memory for pathwise checks.
    #[serde(default)]
    pub keep_transitions: bool,
}

/// A problem instance and starting point built from a [`RunConfig`].
#[derive(Debug, Clone)]
pub struct Instance {
    pub problem: Problem,
    pub theta0: DenseVector,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl RunConfig {
    pub fn new(seed: u64, steps: u64, problem: ProblemSpec, optimizer: OptimizerSpec) -> Self {
        RunConfig {
            label: None,
            seed,
            seeds: vec![seed],
            steps,
            problem,
            noise: NoiseSpec::Exact,
            clip: None,
            init: InitSpec::Auto,
            optimizer,
            certificates: false,
            keep_transitions: false,
        }
    }

    /// Seeds of the individual runs; `seed` alone when none are listed.
    pub fn run_seeds(&self) -> Vec<u64> {
        if self.seeds.is_empty() {
            vec![self.seed]
        } else {
            self.seeds.clone()
        }
    }

    pub fn display_label(&self) -> String {
        self.label
            .clone()
            .unwrap_or_else(|| format!("{}(lr={})", self.optimizer.name(), self.optimizer.lr()))
    }

    /// Check every field without running anything expensive.
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(config_err("steps must be at least 1"));
        }
        let seeds = self.run_seeds();
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != seeds.len() {
            return Err(config_err("seeds must be distinct"));
        }
        match self.problem {
            ProblemSpec::Quadratic { dim, kappa } => {
                if dim == 0 || !(kappa >= 1.0 && kappa.is_finite()) {
                    return Err(config_err("problem.quadratic needs dim >= 1 and kappa >= 1"));
                }
            }
            ProblemSpec::Rosenbrock { dim } => {
                if dim == 0 || dim % 2 != 0 {
                    return Err(config_err("problem.rosenbrock needs an even dim >= 2"));
                }
            }
            ProblemSpec::Logistic { samples, dim, l2 } => {
                if samples == 0 || dim == 0 || !(l2 >= 0.0) {
                    return Err(config_err("problem.logistic needs samples, dim >= 1 and l2 >= 0"));
                }
            }
            ProblemSpec::Mlp { samples, input, hidden } => {
                if samples == 0 || input == 0 || hidden == 0 {
                    return Err(config_err("problem.mlp needs samples, input, hidden >= 1"));
                }
            }
        }
        match self.noise {
            NoiseSpec::Exact => {}
            NoiseSpec::Gaussian { sigma } => {
                if !(sigma >= 0.0 && sigma.is_finite()) {
                    return Err(config_err("noise.sigma must be nonnegative"));
                }
            }
            NoiseSpec::Minibatch { batch } => {
                if batch == 0 {
                    return Err(config_err("noise.batch must be at least 1"));
                }
                if !matches!(self.problem, ProblemSpec::Logistic { .. } | ProblemSpec::Mlp { .. }) {
                    return Err(config_err("minibatch noise needs a finite-sum problem (logistic or mlp)"));
                }
            }
        }
        if let Some(c) = self.clip {
            if !(c > 0.0) {
                return Err(config_err("clip must be positive"));
            }
        }
        match &self.init {
            InitSpec::Uniform { radius } if !(*radius >= 0.0) => {
                return Err(config_err("init.radius must be nonnegative"));
            }
            InitSpec::Point { values } if values.len() != self.dim() => {
                return Err(config_err(format!(
                    "init.values has {} entries, problem has dimension {}",
                    values.len(),
                    self.dim()
                )));
            }
            _ => {}
        }
        self.validate_optimizer()
    }

    fn validate_optimizer(&self) -> Result<()> {
        let bad = |msg: String| Err(config_err(format!("optimizer: {msg}")));
        match &self.optimizer {
            OptimizerSpec::Adan { .. } => {
                self.optimizer.adan_hyper().expect("adan spec")?;
            }
            spec @ OptimizerSpec::Adamw { .. } => {
                let h = spec.adamw_hyper().expect("adamw spec");
                let upper = if h.debias { h.beta1 < 1.0 && h.beta2 < 1.0 } else { h.beta1 <= 1.0 && h.beta2 <= 1.0 };
                if !(h.lr > 0.0 && h.eps > 0.0 && h.weight_decay >= 0.0 && h.beta1 >= 0.0 && h.beta2 >= 0.0 && upper) {
                    return bad(format!("invalid adamw hyperparameters {h:?}"));
                }
            }
            OptimizerSpec::Sgdm { lr, momentum } => {
                if !(*lr > 0.0) || !(0.0..1.0).contains(momentum) {
                    return bad(format!("sgdm needs lr > 0 and momentum in [0, 1), got {lr}, {momentum}"));
                }
            }
            OptimizerSpec::Agd { lr, alpha } => {
                if !(*lr > 0.0) || !(0.0..1.0).contains(alpha) {
                    return bad(format!("agd needs lr > 0 and alpha in [0, 1), got {lr}, {alpha}"));
                }
            }
        }
        if (self.certificates || self.keep_transitions) && !matches!(self.optimizer, OptimizerSpec::Adan { .. }) {
            return Err(config_err("certificates and transitions are recorded for adan only"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self.problem {
            ProblemSpec::Quadratic { dim, .. } | ProblemSpec::Rosenbrock { dim } | ProblemSpec::Logistic { dim, .. } => dim,
            ProblemSpec::Mlp { input, hidden, .. } => Mlp::packed_len(input, hidden),
        }
    }

    /// Build the objective, oracle and starting point.
    pub fn instance(&self) -> Result<Instance> {
        self.validate()?;
        let root = SeededRng::new(self.seed);
        let mut problem_rng = root.fork(0);
        let mut init_rng = root.fork(1);
        let (problem, auto) = match self.problem {
            ProblemSpec::Quadratic { dim, kappa } => {
                let q = Quadratic::log_spaced(dim, kappa, &mut problem_rng)?;
                (Problem::new(q), init_rng.uniform_vector(dim, -1.0, 1.0))
            }
            ProblemSpec::Rosenbrock { dim } => {
                let start = (0..dim).map(|i| if i % 2 == 0 { -1.2 } else { 1.0 }).collect();
                (Problem::new(Rosenbrock::new(dim)?), start)
            }
            ProblemSpec::Logistic { samples, dim, l2 } => {
                let l = Logistic::new(Dataset::synthetic(samples, dim, self.seed), l2)?;
                (Problem::new(l), init_rng.uniform_vector(dim, -1.0, 1.0))
            }
            ProblemSpec::Mlp { samples, input, hidden } => {
                let m = Mlp::new(&[input, hidden, 1], Dataset::synthetic(samples, input, self.seed))?;
                let start = m.init(&mut init_rng);
                (Problem::new(m), start)
            }
        };
        self.finish(problem, auto, &mut init_rng)
    }

    fn finish(&self, problem: Problem, auto: DenseVector, rng: &mut SeededRng) -> Result<Instance> {
        let mut problem = problem.with_noise(self.noise.into())?;
        if let Some(c) = self.clip {
            problem = problem.with_clip(c)?;
        }
        let d = problem.dim();
        let theta0 = match &self.init {
            InitSpec::Auto => auto,
            InitSpec::Zeros => DenseVector::zeros(d),
            InitSpec::Constant { value } => DenseVector::filled(d, *value),
            InitSpec::Uniform { radius } => rng.uniform_vector(d, -radius, *radius),
            InitSpec::Point { values } => DenseVector::from(values.clone()),
        };
        Ok(Instance { problem, theta0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn adan() -> OptimizerSpec {
        OptimizerSpec::Adan {
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
        }
    }

    #[test]
    fn validation() {
        let ok = RunConfig::new(1, 10, ProblemSpec::Quadratic { dim: 4, kappa: 10.0 }, adan());
        assert!(ok.validate().is_ok());
        let mut c = ok.clone();
        c.steps = 0;
        assert!(c.validate().is_err());
        let mut c = ok.clone();
        c.seeds = vec![1, 1];
        assert!(c.validate().is_err());
        let mut c = ok.clone();
        c.noise = NoiseSpec::Minibatch { batch: 4 };
        assert!(c.validate().is_err());
        let mut c = ok.clone();
        c.optimizer = OptimizerSpec::Sgdm { lr: 0.1, momentum: 1.0 };
        assert!(c.validate().is_err());
        let mut c = ok.clone();
        c.certificates = true;
        c.optimizer = OptimizerSpec::Agd { lr: 0.1, alpha: 0.5 };
        assert!(c.validate().is_err());
        let mut c = ok;
        c.init = InitSpec::Point { values: vec![0.0; 3] };
        assert!(c.validate().is_err());
    }

    #[test]
    fn theorem_decay_rate_is_resolved() {
        let with = |eps: f64| match adan() {
            OptimizerSpec::Adan {
                lr, beta1, beta2, beta3, weight_decay, decay_rate, debias, restart_period, clip_norm, ..
            } => OptimizerSpec::Adan {
                lr,
                beta1,
                beta2,
                beta3,
                eps,
                weight_decay,
                decay_rate,
                decay_c_inf: Some(2.0),
                debias,
                restart_period,
                clip_norm,
            },
            _ => unreachable!(),
        };
        let h = with(1.0).adan_hyper().unwrap().unwrap();
        assert_eq!(h.decay_rate, std::f64::consts::SQRT_2 * 0.01 * 2.0);
        assert!(with(1e-8).adan_hyper().unwrap().is_err());
    }

    #[test]
    fn instances_are_deterministic() {
        let mut c = RunConfig::new(5, 3, ProblemSpec::Mlp { samples: 16, input: 3, hidden: 4 }, adan());
        let a = c.instance().unwrap();
        let b = c.instance().unwrap();
        assert_eq!(a.theta0, b.theta0);
        assert_eq!(a.theta0.len(), c.dim());
        c.problem = ProblemSpec::Rosenbrock { dim: 4 };
        assert_eq!(c.instance().unwrap().theta0, DenseVector::from([-1.2, 1.0, -1.2, 1.0]));
    }
}
