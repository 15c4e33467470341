//! Pass/fail rows shared by the statistical and structural checks.

use std::fmt;

/// One verified inequality or identity.
///
/// `lhs` and `rhs` are the two sides as estimated, `slack` the tolerance
/// the comparison allowed. `detail` carries anything else worth printing.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub passed: bool,
    pub detail: String,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, slack: f64, passed: bool) -> Self {
        Self { name: name.into(), lhs, rhs, slack, passed, detail: String::new() }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: lhs={:.6} rhs={:.6} slack={:.3e}",
            if self.passed { "pass" } else { "FAIL" },
            self.name,
            self.lhs,
            self.rhs,
            self.slack
        )?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}
