//! Step-size, weight-decay and gradient-conditioning schedules.

use std::collections::BTreeMap;

use crate::error::{domain, Error, Result};
use crate::linalg::DenseVector;

/// Weight decay at step `k`: `λ·(1−μ)^k`.
pub fn decay_lambda(lambda: f64, mu: f64, k: u64) -> Result<f64> {
    if !(0.0..1.0).contains(&mu) {
        return Err(domain(format!("decay rate mu must lie in [0, 1), got {mu}")));
    }
    if mu == 0.0 {
        return Ok(lambda);
    }
    Ok(lambda * (1.0 - mu).powf(k as f64))
}

/// Adam-style bias correction `moment / (1 − (1−β)^k)` for an EMA that
/// puts weight `β` on the newest sample.
pub fn debias_correct(moment: &DenseVector, beta: f64, k: u64) -> Result<DenseVector> {
    Ok(moment.scale(1.0 / debias_factor(beta, k)?))
}

pub(crate) fn debias_factor(beta: f64, k: u64) -> Result<f64> {
    if k == 0 {
        return Err(domain("bias correction is undefined before the first step"));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(domain(format!("bias correction needs beta in (0, 1], got {beta}")));
    }
    Ok(1.0 - (1.0 - beta).powf(k as f64))
}

/// Rescale `g` so its Euclidean norm is at most `tau`.
pub fn clip_global(g: &DenseVector, tau: f64) -> DenseVector {
    debug_assert!(tau > 0.0);
    let norm = g.l2();
    if norm <= tau {
        g.clone()
    } else {
        g.scale(tau / norm)
    }
}

/// Clamp every coordinate of `g` into `[-c, c]`.
pub fn clip_elementwise(g: &DenseVector, c: f64) -> DenseVector {
    debug_assert!(c > 0.0);
    g.map(|x| x.clamp(-c, c))
}

/// The square-root learning-rate rule `lr = √(bs / base_batch) · base_lr`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqrtLrRule {
    pub base_lr: f64,
    pub base_batch: u64,
}

impl Default for SqrtLrRule {
    fn default() -> Self {
        SqrtLrRule {
            base_lr: 6.25e-3,
            base_batch: 256,
        }
    }
}

impl SqrtLrRule {
    pub fn lr_for_batch(&self, batch_size: u64) -> f64 {
        (batch_size as f64 / self.base_batch as f64).sqrt() * self.base_lr
    }
}

/// Learning rate for `batch_size` under the default sqrt rule.
pub fn lr_for_batch(batch_size: u64) -> f64 {
    SqrtLrRule::default().lr_for_batch(batch_size)
}

/// How [`WarmupTable`] treats batch sizes that are not tabulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WarmupMode {
    #[default]
    Strict,
    /// Linear in `(ln bs, ln epochs)` between neighbours, clamped at the ends.
    Interpolate,
}

/// Warmup epochs keyed by batch size.
#[derive(Debug, Clone, PartialEq)]
pub struct WarmupTable {
    entries: BTreeMap<u64, u64>,
    pub mode: WarmupMode,
}

impl WarmupTable {
    pub fn new(entries: impl IntoIterator<Item = (u64, u64)>, mode: WarmupMode) -> Result<Self> {
        let entries: BTreeMap<u64, u64> = entries.into_iter().collect();
        if entries.is_empty() {
            return Err(Error::Config("warmup table is empty".into()));
        }
        if entries.iter().any(|(&bs, &ep)| bs == 0 || ep == 0) {
            return Err(Error::Config("warmup table entries must be positive".into()));
        }
        Ok(WarmupTable { entries, mode })
    }

    /// Large-batch preset: 1k→20, 2k→40, 4k→60, 8k→100, 16k→160, 32k→200.
    pub fn large_batch(mode: WarmupMode) -> Self {
        let entries = [
            (1024, 20),
            (2048, 40),
            (4096, 60),
            (8192, 100),
            (16384, 160),
            (32768, 200),
        ];
        WarmupTable {
            entries: entries.into_iter().collect(),
            mode,
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    pub fn warmup_for_batch(&self, batch_size: u64) -> Result<u64> {
        if let Some(&epochs) = self.entries.get(&batch_size) {
            return Ok(epochs);
        }
        match self.mode {
            WarmupMode::Strict => Err(domain(format!(
                "batch size {batch_size} is not in the warmup table"
            ))),
            WarmupMode::Interpolate => {
                if batch_size == 0 {
                    return Err(domain("batch size must be positive"));
                }
                let below = self.entries.range(..batch_size).next_back();
                let above = self.entries.range(batch_size..).next();
                let epochs = match (below, above) {
                    (Some((&b0, &e0)), Some((&b1, &e1))) => {
                        let t = ((batch_size as f64).ln() - (b0 as f64).ln())
                            / ((b1 as f64).ln() - (b0 as f64).ln());
                        ((e0 as f64).ln() * (1.0 - t) + (e1 as f64).ln() * t).exp().round() as u64
                    }
                    (Some((_, &e)), None) | (None, Some((_, &e))) => e,
                    (None, None) => unreachable!("table is non-empty"),
                };
                Ok(epochs.max(1))
            }
        }
    }
}

/// Warmup epochs for `batch_size` under the strict large-batch preset.
pub fn warmup_for_batch(batch_size: u64) -> Result<u64> {
    WarmupTable::large_batch(WarmupMode::Strict).warmup_for_batch(batch_size)
}

/// Learning-rate rule plus warmup table.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub lr_rule: SqrtLrRule,
    pub warmup: WarmupTable,
}

impl Schedule {
    pub fn large_batch(mode: WarmupMode) -> Self {
        Schedule {
            lr_rule: SqrtLrRule::default(),
            warmup: WarmupTable::large_batch(mode),
        }
    }

    /// `(lr, warmup epochs)` for a batch size.
    pub fn for_batch(&self, batch_size: u64) -> Result<(f64, u64)> {
        Ok((
            self.lr_rule.lr_for_batch(batch_size),
            self.warmup.warmup_for_batch(batch_size)?,
        ))
    }
}
