//! Config loading and the `run`, `verify` and `sweep` commands.
//!
//! Every command returns one of three exit codes: [`EXIT_OK`],
//! [`EXIT_FAILED`] when a checked invariant does not hold, and
//! [`EXIT_CONFIG`] for malformed configs and I/O problems.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use adan::bench::{
    run, sweep_momentum, verify, write_complexity_csv, write_sweep_csv, ProblemSpec, RunConfig, VerifyConfig,
};
use adan::theory::{complexity_slope, CertificateMode, ComplexitySetup};
use adan::Error;
use serde::de::DeserializeOwned;
use serde::Deserialize;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILED: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;

pub const VERIFY_REPORT: &str = "verify_report.csv";
pub const SWEEP_SUMMARY: &str = "sweep_summary.csv";

/// What every subcommand needs besides its config.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Options {
    pub config: PathBuf,
    pub out: PathBuf,
    pub quiet: bool,
}

impl Options {
    pub fn new(config: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        Options {
            config: config.into(),
            out: out.into(),
            quiet: true,
        }
    }

    fn say(&self, msg: impl fmt::Display) {
        if !self.quiet {
            println!("{msg}");
        }
    }
}

/// A problem that stops a command before or during computation.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError(pub String);

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError(e.to_string())
    }
}

/// Read and parse a TOML file. Errors carry the offending key path plus
/// the line and column.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError(format!("cannot read {}: {e}", path.display())))?;
    parse(&text).map_err(|e| CliError(format!("{}: {e}", path.display())))
}

/// Parse TOML text into a config type.
pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T, CliError> {
    let de = toml::Deserializer::parse(text).map_err(|e| CliError(e.to_string()))?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            CliError(e.into_inner().to_string())
        } else {
            CliError(format!("in `{path}`: {}", e.into_inner()))
        }
    })
}

fn prepare_out(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError(format!("cannot create {}: {e}", dir.display())))
}

fn create(path: &Path) -> Result<fs::File, CliError> {
    fs::File::create(path).map_err(|e| CliError(format!("cannot write {}: {e}", path.display())))
}

fn finish(result: Result<u8, CliError>) -> u8 {
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

/// Run every seed of a [`RunConfig`] and write `trace_seed<seed>.csv` per
/// seed. Divergence is recorded in the trace and still exits 0.
pub fn cmd_run(opts: &Options) -> u8 {
    finish(try_run(opts))
}

fn try_run(opts: &Options) -> Result<u8, CliError> {
    let config: RunConfig = load(&opts.config)?;
    config.validate()?;
    prepare_out(&opts.out)?;
    for trace in run(&config)? {
        let path = opts.out.join(trace.file_name());
        trace.save_csv(&path)?;
        match trace.diverged_at {
            Some(k) => opts.say(format_args!("seed {}: diverged at step {k}", trace.seed)),
            None => opts.say(format_args!(
                "seed {}: final loss {:e} after {} steps",
                trace.seed, trace.final_loss, config.steps
            )),
        }
    }
    Ok(EXIT_OK)
}

/// Run the selected checks, write [`VERIFY_REPORT`] and exit 1 if any
/// gating check fails.
pub fn cmd_verify(opts: &Options) -> u8 {
    finish(try_verify(opts))
}

fn try_verify(opts: &Options) -> Result<u8, CliError> {
    let config: VerifyConfig = load(&opts.config)?;
    config.validate()?;
    prepare_out(&opts.out)?;
    let report = verify(&config)?;
    report.write_csv(create(&opts.out.join(VERIFY_REPORT))?)?;
    opts.say(&report);
    Ok(if report.all_passed() { EXIT_OK } else { EXIT_FAILED })
}

/// Either a complexity sweep over target accuracies or a momentum grid.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepConfig {
    Complexity(ComplexitySweep),
    Momentum(MomentumSweep),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexitySweep {
    /// Fixes the problem instance and starting point.
    pub seed: u64,
    /// Gradient-noise seeds averaged at every accuracy.
    pub seeds: Vec<u64>,
    pub problem: ProblemSpec,
    pub eps_targets: Vec<f64>,
    #[serde(default)]
    pub sigma: f64,
    pub c_inf: f64,
    #[serde(default = "one")]
    pub eps: f64,
    #[serde(default = "beta3")]
    pub beta3: f64,
    #[serde(default)]
    pub weight_decay: f64,
    pub max_steps: u64,
    #[serde(default)]
    pub mode: CertificateMode,
}

fn one() -> f64 {
    1.0
}

fn beta3() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentumSweep {
    /// `(β1, β2, β3)` triples.
    pub grid: Vec<(f64, f64, f64)>,
    pub base: RunConfig,
}

/// Write one [`SWEEP_SUMMARY`] CSV for either kind of sweep.
pub fn cmd_sweep(opts: &Options) -> u8 {
    finish(try_sweep(opts))
}

fn try_sweep(opts: &Options) -> Result<u8, CliError> {
    let config: SweepConfig = load(&opts.config)?;
    let path = opts.out.join(SWEEP_SUMMARY);
    match config {
        SweepConfig::Complexity(c) => {
            if c.eps_targets.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
                return Err(CliError("eps_targets must be positive and finite".into()));
            }
            if c.max_steps == 0 {
                return Err(CliError("max_steps must be at least 1".into()));
            }
            let setup = ComplexitySetup {
                problem: c.problem,
                problem_seed: c.seed,
                sigma: c.sigma,
                c_inf: c.c_inf,
                eps: c.eps,
                beta3: c.beta3,
                weight_decay: c.weight_decay,
                seeds: c.seeds,
                max_steps: c.max_steps,
                mode: c.mode,
            };
            prepare_out(&opts.out)?;
            let report = complexity_slope(&setup, &c.eps_targets)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            write_complexity_csv(&report, create(&path)?)?;
            match report.slope {
                Some(s) => opts.say(format_args!("fitted slope {s:.3}")),
                None => opts.say("too few certified points to fit a slope"),
            }
        }
        SweepConfig::Momentum(m) => {
            if m.grid.is_empty() {
                return Err(CliError("momentum grid is empty".into()));
            }
            m.base.validate()?;
            prepare_out(&opts.out)?;
            let rows = sweep_momentum(&m.base, &m.grid)?;
            for r in rows.iter().filter(|r| r.rejected.is_some()) {
                eprintln!(
                    "warning: ({}, {}, {}) rejected: {}",
                    r.beta1,
                    r.beta2,
                    r.beta3,
                    r.rejected.as_deref().unwrap_or_default()
                );
            }
            write_sweep_csv(&rows, create(&path)?)?;
            opts.say(format_args!("{} grid points written to {}", rows.len(), path.display()));
        }
    }
    Ok(EXIT_OK)
}
