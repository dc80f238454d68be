use std::cmp::Ordering;

use crate::bench::config::RunConfig;
use crate::bench::run::{run, Trace};
use crate::error::{Error, Result};

/// Median and quartiles of a sample (linear interpolation between order
/// statistics). Infinite entries sort last.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spread {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
}

impl Spread {
    pub fn of(values: &[f64]) -> Result<Spread> {
        if values.is_empty() {
            return Err(Error::Insufficient("no values to summarise".into()));
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Ok(Spread {
            median: quantile(&v, 0.5),
            q1: quantile(&v, 0.25),
            q3: quantile(&v, 0.75),
        })
    }

    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi || sorted[lo] == sorted[hi] {
        return sorted[lo];
    }
    let w = pos - lo as f64;
    sorted[lo] + w * (sorted[hi] - sorted[lo])
}

pub fn median(values: &[f64]) -> Result<f64> {
    Spread::of(values).map(|s| s.median)
}

/// Summary of one configuration over its seeds.
#[derive(Debug, Clone)]
pub struct Arm {
    pub label: String,
    pub final_loss: Spread,
    pub final_grad_norm: Spread,
    pub diverged_seeds: usize,
    pub grad_evals: u64,
    pub traces: Vec<Trace>,
}

impl Arm {
    pub fn from_traces(label: String, traces: Vec<Trace>) -> Result<Arm> {
        let losses: Vec<f64> = traces.iter().map(|t| t.final_loss).collect();
        let grads: Vec<f64> = traces.iter().map(|t| t.final_grad_norm).collect();
        Ok(Arm {
            label,
            final_loss: Spread::of(&losses)?,
            final_grad_norm: Spread::of(&grads)?,
            diverged_seeds: traces.iter().filter(|t| t.diverged()).count(),
            grad_evals: traces.iter().map(|t| t.grad_evals).max().unwrap_or(0),
            traces,
        })
    }

    pub fn diverged(&self) -> bool {
        self.diverged_seeds > 0
    }
}

/// Pairwise comparison of median final losses.
#[derive(Debug, Clone, PartialEq)]
pub struct PairOrdering {
    pub left: usize,
    pub right: usize,
    pub ordering: Ordering,
}

#[derive(Debug, Clone)]
pub struct CompareReport {
    pub arms: Vec<Arm>,
    pub orderings: Vec<PairOrdering>,
}

impl CompareReport {
    /// Index of the arm with the smallest median final loss.
    pub fn best(&self) -> usize {
        (0..self.arms.len())
            .min_by(|&a, &b| self.arms[a].final_loss.median.total_cmp(&self.arms[b].final_loss.median))
            .expect("at least one arm")
    }

    pub fn divergent_arms(&self) -> Vec<&str> {
        self.arms.iter().filter(|a| a.diverged()).map(|a| a.label.as_str()).collect()
    }
}

/// Everything except the optimizer must agree, so that every arm gets the
/// same problem, seeds and gradient-evaluation budget.
fn ensure_same_budget(base: &RunConfig, other: &RunConfig) -> Result<()> {
    let mismatch = |what: &str| {
        Err(Error::Config(format!(
            "cannot compare {} with {}: {what} differs",
            base.display_label(),
            other.display_label()
        )))
    };
    if base.steps != other.steps {
        return mismatch("step budget");
    }
    if base.run_seeds() != other.run_seeds() {
        return mismatch("seed list");
    }
    if base.problem != other.problem || base.seed != other.seed || base.init != other.init {
        return mismatch("problem");
    }
    if base.noise != other.noise || base.clip != other.clip {
        return mismatch("gradient oracle");
    }
    Ok(())
}

pub fn compare(configs: &[RunConfig]) -> Result<CompareReport> {
    let first = configs
        .first()
        .ok_or_else(|| Error::Config("nothing to compare".into()))?;
    for c in configs {
        c.validate()?;
        ensure_same_budget(first, c)?;
    }
    let arms = configs
        .iter()
        .map(|c| Arm::from_traces(c.display_label(), run(c)?))
        .collect::<Result<Vec<_>>>()?;
    let mut orderings = Vec::new();
    for i in 0..arms.len() {
        for j in i + 1..arms.len() {
            orderings.push(PairOrdering {
                left: i,
                right: j,
                ordering: arms[i].final_loss.median.total_cmp(&arms[j].final_loss.median),
            });
        }
    }
    Ok(CompareReport { arms, orderings })
}

/// Result of tuning the learning rate of one configuration.
#[derive(Debug, Clone)]
pub struct LrSearch {
    pub best_lr: f64,
    pub best: Arm,
    /// `(lr, median final loss)` for every grid point.
    pub grid: Vec<(f64, f64)>,
}

/// Run `base` at every learning rate in `lrs` and keep the arm with the
/// smallest median final loss.
pub fn tune_lr(base: &RunConfig, lrs: &[f64]) -> Result<LrSearch> {
    if lrs.is_empty() {
        return Err(Error::Config("empty learning-rate grid".into()));
    }
    let configs: Vec<RunConfig> = lrs
        .iter()
        .map(|&lr| {
            let mut c = base.clone();
            c.optimizer = base.optimizer.with_lr(lr);
            c.label = Some(format!("{}(lr={lr})", base.optimizer.name()));
            c
        })
        .collect();
    let report = compare(&configs)?;
    let grid = lrs.iter().zip(&report.arms).map(|(&lr, a)| (lr, a.final_loss.median)).collect();
    let best = report.best();
    Ok(LrSearch {
        best_lr: lrs[best],
        best: report.arms[best].clone(),
        grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::config::{OptimizerSpec, ProblemSpec};

    fn sgdm(lr: f64) -> RunConfig {
        let mut c = RunConfig::new(3, 200, ProblemSpec::Quadratic { dim: 6, kappa: 10.0 }, OptimizerSpec::Sgdm {
            lr,
            momentum: 0.5,
        });
        c.seeds = vec![1, 2, 3];
        c
    }

    #[test]
    fn quartiles() {
        let s = Spread::of(&[4.0, 1.0, 3.0, 2.0, 5.0]).unwrap();
        assert_eq!((s.q1, s.median, s.q3), (2.0, 3.0, 4.0));
        let s = Spread::of(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.median, 2.5);
        let s = Spread::of(&[1.0, f64::INFINITY, f64::INFINITY]).unwrap();
        assert_eq!(s.median, f64::INFINITY);
        assert!(Spread::of(&[]).is_err());
    }

    #[test]
    fn identical_configs_tie() {
        let r = compare(&[sgdm(0.05), sgdm(0.05)]).unwrap();
        assert_eq!(r.arms[0].final_loss, r.arms[1].final_loss);
        assert_eq!(r.orderings[0].ordering, Ordering::Equal);
    }

    #[test]
    fn divergent_arm_is_flagged() {
        let r = compare(&[sgdm(0.05), sgdm(5.0)]).unwrap();
        assert_eq!(r.divergent_arms(), vec![r.arms[1].label.as_str()]);
        assert_eq!(r.orderings[0].ordering, Ordering::Less);
        assert_eq!(r.best(), 0);
    }

    #[test]
    fn mismatched_budget_is_rejected() {
        let mut other = sgdm(0.05);
        other.steps = 100;
        assert!(matches!(compare(&[sgdm(0.05), other]), Err(Error::Config(_))));
        let mut other = sgdm(0.05);
        other.seeds = vec![9];
        assert!(compare(&[sgdm(0.05), other]).is_err());
    }

    #[test]
    fn lr_search_picks_stable_rate() {
        let s = tune_lr(&sgdm(0.01), &[1e-3, 0.05, 5.0]).unwrap();
        assert_eq!(s.best_lr, 0.05);
        assert_eq!(s.grid.len(), 3);
    }
}
