use std::fmt;
use std::io::Write;

use crate::error::Result;

/// One check outcome: `observed` compared against `bound` with `relation`.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub relation: &'static str,
    pub bound: f64,
    pub observed: f64,
    pub passed: bool,
    /// Soft lines are reported but never fail a report.
    pub gating: bool,
}

impl CheckLine {
    /// Passes when `observed ≤ bound`.
    pub fn at_most(name: impl Into<String>, observed: f64, bound: f64) -> Self {
        CheckLine {
            name: name.into(),
            relation: "<=",
            bound,
            observed,
            passed: observed <= bound,
            gating: true,
        }
    }

    /// Passes when `observed ≥ bound`.
    pub fn at_least(name: impl Into<String>, observed: f64, bound: f64) -> Self {
        CheckLine {
            name: name.into(),
            relation: ">=",
            bound,
            observed,
            passed: observed >= bound,
            gating: true,
        }
    }

    pub fn soft(mut self) -> Self {
        self.gating = false;
        self
    }

    pub fn status(&self) -> &'static str {
        match (self.passed, self.gating) {
            (true, _) => "pass",
            (false, true) => "fail",
            (false, false) => "warn",
        }
    }
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<4} {}: observed {:e} {} {:e}",
            self.status(),
            self.name,
            self.observed,
            self.relation,
            self.bound
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CheckReport {
    pub lines: Vec<CheckLine>,
}

impl CheckReport {
    pub fn push(&mut self, line: CheckLine) {
        self.lines.push(line);
    }

    pub fn extend(&mut self, other: CheckReport) {
        self.lines.extend(other.lines);
    }

    pub fn all_passed(&self) -> bool {
        self.lines.iter().all(|l| l.passed || !l.gating)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckLine> {
        self.lines.iter().filter(|l| !l.passed && l.gating)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["check", "relation", "bound", "observed", "status"])?;
        for l in &self.lines {
            w.write_record([
                l.name.clone(),
                l.relation.to_string(),
                l.bound.to_string(),
                l.observed.to_string(),
                l.status().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            writeln!(f, "{l}")?;
        }
        Ok(())
    }
}
