//! Machine checks for the identities, inequalities and parameter schedules
//! behind the convergence analysis, evaluated on recorded runs.

mod certificate;
mod checks;
mod complexity;
mod params;
mod recursions;
pub mod report;

pub use certificate::{
    mean_averages, measure_constants, stationarity_certificate, CertificateRecord, MeasuredConstants,
    StationarityAverages,
};
pub use checks::{
    check_agd_equivalence, check_descent_lemma, check_lambda_schedule, check_preconditioner_ratio,
    check_prox_residual, descent_premise, DescentReport, EquivalenceReport, RatioReport, DESCENT_SLACK,
};
pub use complexity::{
    complexity_slope, fit_slope, CertificateMode, ComplexityPoint, ComplexityReport, ComplexitySetup,
};
pub use params::{theorem_params, TheoremParams, NOISELESS_BETAS};
pub use recursions::{check_moment_recursions, RecursionReport, RecursionSetup, MIN_SEEDS, SE_SLACK};
pub use report::{CheckLine, CheckReport};
