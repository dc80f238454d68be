use std::io::{Read, Write};
use std::path::Path;
use std::time::{Duration, Instant};

use crate::bench::config::{Instance, OptimizerSpec, RunConfig};
use crate::error::{Error, Result};
use crate::linalg::{DenseVector, Norms, SeededRng};
use crate::optim::{AdamWState, AdanState, AdanTransition, AgdState, SgdmState};
use crate::theory::{measure_constants, CertificateRecord, MeasuredConstants};

/// One row of a trace. `loss` is measured where the gradient was taken;
/// under minibatch noise without certificates it is the minibatch mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: u64,
    pub loss: f64,
    pub grad_l2: f64,
    pub grad_linf: f64,
    pub cert_u: Option<f64>,
    pub cert_m: Option<f64>,
    pub cert_v: Option<f64>,
    pub lambda_k: f64,
}

pub const CSV_HEADER: [&str; 8] = [
    "step", "loss", "grad_l2", "grad_linf", "cert_u", "cert_m", "cert_v", "lambda_k",
];

/// Output of one seeded run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub label: String,
    pub seed: u64,
    pub dim: usize,
    pub records: Vec<StepRecord>,
    pub certificates: Vec<CertificateRecord>,
    pub transitions: Vec<AdanTransition>,
    /// Step at which a non-finite value stopped the run.
    pub diverged_at: Option<u64>,
    /// Exact loss at the last iterate; `+∞` for diverged runs.
    pub final_loss: f64,
    /// `‖∇f‖₂` at the last iterate; `+∞` for diverged runs.
    pub final_grad_norm: f64,
    pub final_theta: DenseVector,
    /// Oracle calls charged to the optimizer (one per step).
    pub grad_evals: u64,
    pub wall_time: Duration,
}

impl Trace {
    pub fn diverged(&self) -> bool {
        self.diverged_at.is_some()
    }

    pub fn file_name(&self) -> String {
        format!("trace_seed{}.csv", self.seed)
    }

    /// `c_∞`, `c_2` over the gradients fed to the optimizer.
    pub fn constants(&self) -> Result<MeasuredConstants> {
        let norms: Vec<Norms> = self
            .records
            .iter()
            .map(|r| Norms {
                l2: r.grad_l2,
                linf: r.grad_linf,
            })
            .collect();
        measure_constants(&norms, self.dim)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        write_records(&self.records, writer)
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_records<W: Write>(records: &[StepRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.step.to_string(),
            r.loss.to_string(),
            r.grad_l2.to_string(),
            r.grad_linf.to_string(),
            fmt_opt(r.cert_u),
            fmt_opt(r.cert_m),
            fmt_opt(r.cert_v),
            r.lambda_k.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(reader: R) -> Result<Vec<StepRecord>> {
    let mut rd = csv::Reader::from_reader(reader);
    let header = rd.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Config(format!("unexpected trace header {header:?}")));
    }
    let num = |s: &str| -> Result<f64> {
        s.parse::<f64>()
            .map_err(|e| Error::Config(format!("bad number {s:?} in trace: {e}")))
    };
    let opt = |s: &str| -> Result<Option<f64>> { if s.is_empty() { Ok(None) } else { num(s).map(Some) } };
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row?;
        out.push(StepRecord {
            step: row[0]
                .parse()
                .map_err(|e| Error::Config(format!("bad step {:?}: {e}", &row[0])))?,
            loss: num(&row[1])?,
            grad_l2: num(&row[2])?,
            grad_linf: num(&row[3])?,
            cert_u: opt(&row[4])?,
            cert_m: opt(&row[5])?,
            cert_v: opt(&row[6])?,
            lambda_k: num(&row[7])?,
        });
    }
    Ok(out)
}

enum Engine {
    Adan(AdanState),
    AdamW(AdamWState),
    Sgdm(SgdmState),
    Agd(AgdState),
}

impl Engine {
    fn new(spec: &OptimizerSpec, theta0: DenseVector) -> Result<Engine> {
        Ok(match *spec {
            OptimizerSpec::Adan { .. } => Engine::Adan(AdanState::new(theta0, spec.adan_hyper().expect("adan")?)?),
            OptimizerSpec::Adamw { .. } => Engine::AdamW(AdamWState::new(theta0, spec.adamw_hyper().expect("adamw"))?),
            OptimizerSpec::Sgdm { lr, momentum } => Engine::Sgdm(SgdmState::new(theta0, lr, momentum)?),
            OptimizerSpec::Agd { lr, alpha } => Engine::Agd(AgdState::new(theta0, lr, alpha)?),
        })
    }

    fn params(&self) -> &DenseVector {
        match self {
            Engine::Adan(s) => &s.theta,
            Engine::AdamW(s) => &s.theta,
            Engine::Sgdm(s) => &s.theta,
            Engine::Agd(s) => &s.theta,
        }
    }

    fn query(&self) -> DenseVector {
        match self {
            Engine::Agd(s) => s.query(),
            other => other.params().clone(),
        }
    }

    fn lambda(&self) -> f64 {
        match self {
            Engine::Adan(s) => s.lambda_k(),
            Engine::AdamW(s) => s.hyper.weight_decay,
            _ => 0.0,
        }
    }
}

/// Run every seed of `config` in seed-list order.
pub fn run(config: &RunConfig) -> Result<Vec<Trace>> {
    let instance = config.instance()?;
    config
        .run_seeds()
        .into_iter()
        .map(|seed| run_seed(config, &instance, seed))
        .collect()
}

/// One seeded run on a prepared instance. Non-finite values end the run
/// early with `diverged_at` set instead of failing.
pub fn run_seed(config: &RunConfig, instance: &Instance, seed: u64) -> Result<Trace> {
    let started = Instant::now();
    let problem = &instance.problem;
    let mut rng = SeededRng::new(seed).fork(2);
    let mut engine = Engine::new(&config.optimizer, instance.theta0.clone())?;
    let want_certs = config.certificates;
    let steps = config.steps as usize;
    let mut records = Vec::with_capacity(steps);
    let mut certificates: Vec<CertificateRecord> = Vec::new();
    let mut transitions = Vec::new();
    let mut prev_full: Option<DenseVector> = None;
    let mut diverged_at = None;

    for k in 0..config.steps {
        let query = engine.query();
        let obs = problem.observe(&query, want_certs, &mut rng)?;
        if !obs.loss.is_finite() || !obs.sample.is_finite() {
            diverged_at = Some(k);
            break;
        }
        let lambda_k = engine.lambda();
        let norms = obs.sample.norms();
        let mut record = StepRecord {
            step: k,
            loss: obs.loss,
            grad_l2: norms.l2,
            grad_linf: norms.linf,
            cert_u: None,
            cert_m: None,
            cert_v: None,
            lambda_k,
        };
        let outcome = match &mut engine {
            Engine::Adan(s) => s.step_transition(&obs.sample).map(Some),
            Engine::AdamW(s) => s.step(&obs.sample).map(|_| None),
            Engine::Sgdm(s) => s.step(&obs.sample).map(|_| None),
            Engine::Agd(s) => s.step(&obs.sample).map(|_| None),
        };
        let transition = match outcome {
            Ok(t) => t,
            Err(Error::NonFinite { .. }) => {
                diverged_at = Some(k);
                break;
            }
            Err(e) => return Err(e),
        };
        if let Some(t) = transition {
            if want_certs {
                let full = obs.full.as_ref().expect("exact gradient requested");
                let cert = CertificateRecord::from_transition(&t, obs.loss, full)?;
                if let (Some(last), Some(prev)) = (certificates.last_mut(), prev_full.as_ref()) {
                    last.full_grad_change_sq = Some(full.dist_sq(prev)?);
                }
                record.cert_u = Some(cert.u_reg_sq);
                record.cert_m = Some(cert.m_err_sq);
                record.cert_v = Some(cert.v_sq);
                certificates.push(cert);
                prev_full = obs.full;
            }
            if config.keep_transitions {
                transitions.push(t);
            }
        }
        let finite_record = [record.cert_u, record.cert_m, record.cert_v]
            .iter()
            .flatten()
            .all(|x| x.is_finite());
        if !finite_record || !engine.params().is_finite() {
            diverged_at = Some(k);
            break;
        }
        records.push(record);
    }

    let final_theta = engine.params().clone();
    let (mut final_loss, final_grad) = problem.objective().loss_and_grad(&final_theta);
    let mut final_grad_norm = final_grad.l2();
    if let (Some(last), Some(prev)) = (certificates.last_mut(), prev_full.as_ref()) {
        if diverged_at.is_none() {
            last.full_grad_change_sq = Some(final_grad.dist_sq(prev)?);
        }
    }
    if diverged_at.is_some() || !final_loss.is_finite() || !final_grad_norm.is_finite() {
        diverged_at.get_or_insert(config.steps);
        final_loss = f64::INFINITY;
        final_grad_norm = f64::INFINITY;
    }
    certificates.truncate(records.len());
    transitions.truncate(records.len());
    Ok(Trace {
        label: config.display_label(),
        seed,
        dim: problem.dim(),
        grad_evals: records.len() as u64,
        records,
        certificates,
        transitions,
        diverged_at,
        final_loss,
        final_grad_norm,
        final_theta,
        wall_time: started.elapsed(),
    })
}
