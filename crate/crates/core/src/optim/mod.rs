//! Optimizer state machines.
//!
//! All optimizers follow the same two-phase protocol: ask for the
//! [`query_point`](Optimizer::query_point), evaluate a gradient there, then
//! [`step`](Optimizer::step). Only AGD queries somewhere other than its
//! current parameters.

pub mod adan;
pub mod agd;
pub mod baselines;
pub mod schedule;

pub use adan::{adan_step, restart_if_due, AdanHyper, AdanState, AdanTransition};
pub use agd::{agd2_step, agd_query, agd_step, map_agd_to_agd2, Agd2State, AgdState};
pub use baselines::{adamw_step, sgdm_step, AdamWHyper, AdamWState, SgdmState};
pub use schedule::{
    clip_elementwise, clip_global, debias_correct, decay_lambda, lr_for_batch, warmup_for_batch,
    Schedule, SqrtLrRule, WarmupMode, WarmupTable,
};

use crate::error::Result;
use crate::linalg::DenseVector;

pub trait Optimizer {
    /// Current parameters.
    fn params(&self) -> &DenseVector;

    /// Point at which the next gradient must be evaluated.
    fn query_point(&self) -> DenseVector {
        self.params().clone()
    }

    fn step(&mut self, grad: &DenseVector) -> Result<()>;
}
