//! Pass/fail bookkeeping shared by the validators.

use std::fmt;

/// One failed identity, with the element that witnesses it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckFailure {
    pub identity: String,
    pub witness: String,
    pub residual: String,
}

impl fmt::Display for CheckFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} fails on {}: residual {}", self.identity, self.witness, self.residual)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CheckReport {
    pub checks: usize,
    pub failures: Vec<CheckFailure>,
}

impl CheckReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn has_failure(&self, identity_prefix: &str) -> bool {
        self.failures.iter().any(|f| f.identity.starts_with(identity_prefix))
    }

    /// Counts a check; `residual` is `None` when it passed.
    pub fn record(&mut self, identity: impl Into<String>, witness: impl Into<String>, residual: Option<String>) {
        self.checks += 1;
        if let Some(residual) = residual {
            self.failures.push(CheckFailure {
                identity: identity.into(),
                witness: witness.into(),
                residual,
            });
        }
    }

    pub fn merge(&mut self, other: CheckReport) {
        self.checks += other.checks;
        self.failures.extend(other.failures);
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.failures.is_empty() {
            return write!(f, "all {} checks passed", self.checks);
        }
        for fl in &self.failures {
            writeln!(f, "{fl}")?;
        }
        Ok(())
    }
}
