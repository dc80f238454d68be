use std::io::Write;

use crate::bench::compare::{Arm, Spread};
use crate::bench::config::{OptimizerSpec, RunConfig};
use crate::bench::run::run;
use crate::error::{Error, Result};
use crate::theory::ComplexityReport;

/// The practical default `(β1, β2, β3)`.
pub const DEFAULT_BETAS: (f64, f64, f64) = (0.02, 0.08, 0.01);

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    /// Median and quartiles of the final loss; `None` for rejected points.
    pub final_loss: Option<Spread>,
    pub diverged_seeds: usize,
    pub is_default: bool,
    /// Why the point was skipped.
    pub rejected: Option<String>,
}

fn with_betas(spec: &OptimizerSpec, b1: f64, b2: f64, b3: f64) -> OptimizerSpec {
    let mut out = spec.clone();
    if let OptimizerSpec::Adan { beta1, beta2, beta3, .. } = &mut out {
        *beta1 = b1;
        *beta2 = b2;
        *beta3 = b3;
    }
    out
}

/// Median final loss of `base` at every `(β1, β2, β3)` in `grid`. Points
/// whose hyperparameters are invalid (for example a decay rate μ ≥ 1 when
/// μ is derived from β3) are reported as rejected rather than run.
pub fn sweep_momentum(base: &RunConfig, grid: &[(f64, f64, f64)]) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::Config("momentum grid is empty".into()));
    }
    if !matches!(base.optimizer, OptimizerSpec::Adan { .. }) {
        return Err(Error::Config("momentum sweeps need an adan optimizer".into()));
    }
    let mut rows = Vec::with_capacity(grid.len());
    for &(b1, b2, b3) in grid {
        let mut cfg = base.clone();
        cfg.optimizer = with_betas(&base.optimizer, b1, b2, b3);
        cfg.label = Some(format!("adan(b1={b1},b2={b2},b3={b3})"));
        let mut row = SweepRow {
            beta1: b1,
            beta2: b2,
            beta3: b3,
            final_loss: None,
            diverged_seeds: 0,
            is_default: (b1, b2, b3) == DEFAULT_BETAS,
            rejected: None,
        };
        match cfg.validate() {
            Ok(()) => {
                let arm = Arm::from_traces(cfg.display_label(), run(&cfg)?)?;
                row.final_loss = Some(arm.final_loss);
                row.diverged_seeds = arm.diverged_seeds;
            }
            Err(Error::Config(msg)) => row.rejected = Some(msg),
            Err(e) => return Err(e),
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "beta1",
        "beta2",
        "beta3",
        "median_final_loss",
        "q1",
        "q3",
        "diverged_seeds",
        "default",
        "status",
    ])?;
    for r in rows {
        let (med, q1, q3) = match r.final_loss {
            Some(s) => (s.median.to_string(), s.q1.to_string(), s.q3.to_string()),
            None => Default::default(),
        };
        let status = match &r.rejected {
            Some(msg) => format!("rejected: {msg}"),
            None => "ok".to_string(),
        };
        w.write_record([
            r.beta1.to_string(),
            r.beta2.to_string(),
            r.beta3.to_string(),
            med,
            q1,
            q3,
            r.diverged_seeds.to_string(),
            r.is_default.to_string(),
            status,
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per target accuracy plus a final `slope` row. Censored points
/// leave `t_star` empty; so does the slope row when it cannot be fitted.
pub fn write_complexity_csv<W: Write>(report: &ComplexityReport, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["row", "eps_target", "theorem_steps", "horizon", "t_star", "slope"])?;
    for p in &report.points {
        w.write_record([
            "point".to_string(),
            p.eps_target.to_string(),
            p.theorem_steps.to_string(),
            p.horizon.to_string(),
            p.t_star.map(|t| t.to_string()).unwrap_or_default(),
            String::new(),
        ])?;
    }
    let slope = report.slope.map(|s| s.to_string()).unwrap_or_default();
    w.write_record(["slope", "", "", "", "", slope.as_str()])?;
    w.flush()?;
    Ok(())
}
