//! Experiment orchestration: configure a problem and an optimizer, run it
//! over seeds, and summarise or compare the resulting traces.

pub mod compare;
pub mod config;
pub mod run;
pub mod sweep;
pub mod verify;

pub use compare::{compare, median, tune_lr, Arm, CompareReport, LrSearch, PairOrdering, Spread};
pub use config::{Instance, InitSpec, NoiseSpec, OptimizerSpec, ProblemSpec, RunConfig};
pub use run::{read_records, run, run_seed, write_records, StepRecord, Trace, CSV_HEADER};
pub use sweep::{sweep_momentum, write_complexity_csv, write_sweep_csv, SweepRow, DEFAULT_BETAS};
pub use verify::{verify, CheckName, FaultInjection, VerifyConfig};
