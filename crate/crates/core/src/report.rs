//! Pass/fail reports shared by the hypothesis checkers.

use std::fmt;

/// One verified (or refuted) condition.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// The measured quantity the verdict is based on (a deviation, a sup, a ratio).
    pub measured: f64,
    pub detail: String,
}

/// An ordered list of named checks.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConditionReport {
    pub checks: Vec<Check>,
}

impl ConditionReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(
        &mut self,
        name: impl Into<String>,
        passed: bool,
        measured: f64,
        detail: impl Into<String>,
    ) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            measured,
            detail: detail.into(),
        });
    }

    pub fn extend(&mut self, other: ConditionReport) {
        self.checks.extend(other.checks);
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Panics if the check is missing; intended for tests and callers that built the report.
    pub fn passed(&self, name: &str) -> bool {
        self.get(name)
            .unwrap_or_else(|| panic!("no check named {name:?} in report"))
            .passed
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "[{}] {:<32} measured={:<24e} {}",
                if c.passed { "pass" } else { "FAIL" },
                c.name,
                c.measured,
                c.detail
            )?;
        }
        Ok(())
    }
}
