//! Check lists with residuals and tolerances, serialisable as JSON.

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Formula the check verifies, when it corresponds to a stated identity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<String>,
}

impl Check {
    /// Passes iff `residual <= tolerance` (NaN fails).
    pub fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            residual,
            tolerance,
            pass: residual <= tolerance,
            anchor: None,
        }
    }

    pub fn anchored(mut self, anchor: impl Into<String>) -> Self {
        self.anchor = Some(anchor.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub seed: u64,
    pub config: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub checks: Vec<Check>,
    pub meta: Meta,
}

impl Report {
    pub fn new(seed: u64, config: Value) -> Self {
        Self {
            checks: Vec::new(),
            meta: Meta { seed, config },
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_logic_and_round_trip() {
        let mut r = Report::new(42, serde_json::json!({"k": 2}));
        r.push(Check::new("ok", 1e-13, 1e-12));
        assert!(r.passed());
        r.push(Check::new("nan", f64::NAN, 1.0));
        assert!(!r.passed());
        assert_eq!(r.failures().count(), 1);
        let mut r = Report::new(7, Value::Null);
        r.push(Check::new("a", 0.0, 1.0).anchored("x = y"));
        let back: Report = serde_json::from_str(&r.to_json_pretty()).unwrap();
        assert_eq!(back, r);
    }
}
