//! Pass/fail reports shared by every verifier.

use serde::Serialize;

/// A single named verdict with the magnitude that decided it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub violation: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a check that passes when `violation ≤ tol`.
    pub fn check(&mut self, name: impl Into<String>, violation: f64, tol: f64) -> &mut Self {
        self.record(name, violation, violation <= tol)
    }

    pub fn record(&mut self, name: impl Into<String>, violation: f64, pass: bool) -> &mut Self {
        self.checks.push(Check { name: name.into(), pass, violation });
        self
    }

    /// Appends another report's checks under `prefix.`.
    pub fn absorb(&mut self, prefix: &str, other: Report) -> &mut Self {
        for c in other.checks {
            self.checks.push(Check { name: format!("{prefix}.{}", c.name), ..c });
        }
        self
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn max_violation(&self) -> f64 {
        self.checks.iter().fold(0.0, |a, c| a.max(c.violation))
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}
