//! Pass/fail records shared by every verification suite.

use serde::Serialize;

pub const SCHEMA_VERSION: &str = "1";

/// Multiple of the propagated error a negative margin must exceed before it counts.
pub const VIOLATION_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    /// A proven identity or bound failed: a defect in the code.
    Fail,
    /// A conjectured or numerically supported claim failed: a finding.
    ViolatedClaim,
}

/// One verified item. `margin > 0` means satisfied.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub margin: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: &'static str,
    pub suite: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(suite: impl Into<String>) -> Self {
        Report { schema_version: SCHEMA_VERSION, suite: suite.into(), checks: Vec::new() }
    }

    pub fn push(&mut self, name: impl Into<String>, status: Status, margin: f64, value: f64) {
        self.checks.push(Check { name: name.into(), status, margin, value });
    }

    /// Residual compared against a tolerance.
    pub fn identity(&mut self, name: impl Into<String>, residual: f64, tol: f64) {
        let margin = tol - residual;
        let status = if residual.is_finite() && margin >= 0.0 { Status::Pass } else { Status::Fail };
        self.push(name, status, margin, residual);
    }

    /// A proven inequality `margin >= 0`, tolerated down to `-VIOLATION_FACTOR * err`.
    pub fn bound(&mut self, name: impl Into<String>, margin: f64, err: f64) {
        let ok = margin.is_finite() && margin >= -VIOLATION_FACTOR * err;
        self.push(name, if ok { Status::Pass } else { Status::Fail }, margin, margin);
    }

    /// A claim (conjecture or unproven regime) `margin >= 0`, same tolerance as [`Report::bound`].
    pub fn claim(&mut self, name: impl Into<String>, margin: f64, err: f64) {
        let ok = margin.is_finite() && margin >= -VIOLATION_FACTOR * err;
        self.push(name, if ok { Status::Pass } else { Status::ViolatedClaim }, margin, margin);
    }

    pub fn flag(&mut self, name: impl Into<String>, ok: bool, value: f64) {
        let status = if ok { Status::Pass } else { Status::Fail };
        self.push(name, status, if ok { 1.0 } else { -1.0 }, value);
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }

    pub fn violations(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == Status::ViolatedClaim)
    }

    pub fn all_pass(&self) -> bool {
        self.failures().next().is_none()
    }

    pub fn has_violations(&self) -> bool {
        self.violations().next().is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statuses() {
        let mut r = Report::new("t");
        r.identity("a", 1e-9, 1e-6);
        r.identity("b", f64::NAN, 1e-6);
        r.bound("c", -1e-17, 1e-17);
        r.claim("d", -1.0, 1e-3);
        assert_eq!(r.checks[0].status, Status::Pass);
        assert_eq!(r.checks[1].status, Status::Fail);
        assert_eq!(r.checks[2].status, Status::Pass);
        assert_eq!(r.checks[3].status, Status::ViolatedClaim);
        assert!(!r.all_pass());
        assert!(r.has_violations());
    }
}
