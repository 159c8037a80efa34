use std::collections::BTreeMap;

use cartan_forge::report::ResidualTable;
use cartan_forge::Result;
use serde::Serialize;
use serde_json::Value;

/// One named check: a residual table or a single scalar against a tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub pass: bool,
    pub max_sup: f64,
    pub tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residuals: Option<ResidualTable>,
}

impl Check {
    pub fn table(t: &ResidualTable, tol: f64) -> Self {
        Check {
            pass: t.pass(),
            max_sup: t.max_sup(),
            tol,
            residuals: Some(t.clone()),
        }
    }

    pub fn scalar(value: f64, tol: f64) -> Self {
        Check {
            pass: value.is_finite() && value <= tol,
            max_sup: value,
            tol,
            residuals: None,
        }
    }

    pub fn flag(ok: bool) -> Self {
        Check {
            pass: ok,
            max_sup: if ok { 0.0 } else { 1.0 },
            tol: 0.0,
            residuals: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub seed: u64,
    pub sampling: Option<Value>,
    pub pass: bool,
    pub preconditions_pass: bool,
    pub checks: BTreeMap<String, Check>,
    pub preconditions: BTreeMap<String, Check>,
    pub results: BTreeMap<String, Value>,
    pub artifacts: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub wall_time_s: f64,
}

impl RunReport {
    pub fn new(command: Vec<String>, seed: u64) -> Self {
        RunReport {
            command,
            seed,
            sampling: None,
            pass: true,
            preconditions_pass: true,
            checks: BTreeMap::new(),
            preconditions: BTreeMap::new(),
            results: BTreeMap::new(),
            artifacts: Vec::new(),
            error: None,
            wall_time_s: 0.0,
        }
    }

    pub fn check(&mut self, name: &str, c: Check) {
        self.pass &= c.pass;
        self.checks.insert(name.to_string(), c);
    }

    pub fn precondition(&mut self, name: &str, c: Check) {
        self.preconditions_pass &= c.pass;
        self.preconditions.insert(name.to_string(), c);
    }

    pub fn result<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        self.results.insert(name.to_string(), serde_json::to_value(value)?);
        Ok(())
    }
}
