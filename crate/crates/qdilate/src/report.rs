//! Residual records shared by every verifier.

use serde::{Deserialize, Serialize};

/// One verified identity: its residual against a tolerance.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Check {
    pub id: String,
    /// The identity being checked, written out as a formula.
    pub anchor: String,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `residual ≤ tol` (NaN never passes).
    pub fn at_most(
        id: impl Into<String>,
        anchor: impl Into<String>,
        residual: f64,
        tol: f64,
    ) -> Self {
        Check {
            id: id.into(),
            anchor: anchor.into(),
            residual,
            tol,
            pass: residual <= tol,
        }
    }

    /// Passes when `value ≥ threshold`; used for separation and rejection checks.
    pub fn at_least(
        id: impl Into<String>,
        anchor: impl Into<String>,
        value: f64,
        threshold: f64,
    ) -> Self {
        Check {
            id: id.into(),
            anchor: anchor.into(),
            residual: value,
            tol: threshold,
            pass: value >= threshold,
        }
    }

    /// Exact equality of two counts (ranks, dimensions); residual is the gap.
    pub fn equal_counts(
        id: impl Into<String>,
        anchor: impl Into<String>,
        got: usize,
        want: usize,
    ) -> Self {
        let gap = (got as f64 - want as f64).abs();
        Check {
            id: id.into(),
            anchor: anchor.into(),
            residual: gap,
            tol: 0.0,
            pass: got == want,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct CheckList {
    pub checks: Vec<Check>,
}

impl CheckList {
    pub fn new() -> Self {
        CheckList::default()
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: CheckList) {
        self.checks.extend(other.checks);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }

    /// Largest residual among checks whose id starts with `prefix`.
    pub fn worst(&self, prefix: &str) -> f64 {
        self.checks
            .iter()
            .filter(|c| c.id.starts_with(prefix))
            .map(|c| c.residual)
            .fold(0.0, f64::max)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

impl IntoIterator for CheckList {
    type Item = Check;
    type IntoIter = std::vec::IntoIter<Check>;

    fn into_iter(self) -> Self::IntoIter {
        self.checks.into_iter()
    }
}

/// Run parameters echoed into every report.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Environment {
    pub trunc: usize,
    pub tol: f64,
    pub structural_tol: f64,
    pub seed: u64,
}

/// Aggregated result of a verification suite.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Report {
    pub suite: String,
    pub records: Vec<Check>,
    pub env: Environment,
    pub overall: bool,
}

impl Report {
    pub fn new(suite: impl Into<String>, mut records: Vec<Check>, env: Environment) -> Self {
        records.sort_by(|a, b| a.id.cmp(&b.id));
        let overall = records.iter().all(|c| c.pass);
        Report {
            suite: suite.into(),
            records,
            env,
            overall,
        }
    }
}
