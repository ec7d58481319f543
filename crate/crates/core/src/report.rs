//! Outcome records shared by the verification routines.

use std::collections::BTreeMap;

use serde_json::{json, Value};

/// One named pass/fail check with a human-readable detail line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }

    pub fn pass(name: impl Into<String>) -> Self {
        Self::new(name, true, "")
    }

    pub fn to_json(&self) -> Value {
        json!({ "name": self.name, "passed": self.passed, "detail": self.detail })
    }
}

/// A batch of checks plus machine-readable artifacts (tables, constants).
#[derive(Clone, Debug, Default)]
pub struct Verification {
    pub checks: Vec<CheckResult>,
    pub artifacts: BTreeMap<String, Value>,
}

impl Verification {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, check: CheckResult) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: Verification) {
        self.checks.extend(other.checks);
        self.artifacts.extend(other.artifacts);
    }

    pub fn artifact(&mut self, key: impl Into<String>, value: Value) {
        self.artifacts.insert(key.into(), value);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.checks.iter().find(|c| !c.passed)
    }
}
