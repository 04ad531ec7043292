//! Structured verdicts shared by the verification routines.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    /// Every residual is the exact rational zero.
    ExactPass,
    /// Numeric residuals below tolerance.
    NumericPass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub index: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationReport {
    pub identity: String,
    pub range: String,
    pub status: Status,
    pub checked: usize,
    pub first_counterexample: Option<String>,
    /// Only nonzero residuals are listed for exact checks.
    pub residuals: Vec<Residual>,
    pub max_error: Option<f64>,
    pub tolerance: Option<f64>,
    pub notes: Vec<String>,
}

impl RelationReport {
    pub fn new(identity: impl Into<String>, range: impl Into<String>) -> Self {
        Self {
            identity: identity.into(),
            range: range.into(),
            status: Status::ExactPass,
            checked: 0,
            first_counterexample: None,
            residuals: Vec::new(),
            max_error: None,
            tolerance: None,
            notes: Vec::new(),
        }
    }

    /// Records an exact check; a nonzero residual fails the report.
    pub fn record_exact(&mut self, index: impl ToString, residual_zero: bool, residual: impl ToString) {
        self.checked += 1;
        if !residual_zero {
            let index = index.to_string();
            if self.first_counterexample.is_none() {
                self.first_counterexample = Some(index.clone());
            }
            self.residuals.push(Residual { index, value: residual.to_string() });
            self.status = Status::Fail;
        }
    }

    /// Records a numeric check against `tol`.
    pub fn record_numeric(&mut self, index: impl ToString, err: f64, tol: f64) {
        self.checked += 1;
        self.tolerance = Some(tol);
        self.max_error = Some(self.max_error.map_or(err, |m| m.max(err)));
        if self.status == Status::ExactPass {
            self.status = Status::NumericPass;
        }
        if !(err <= tol) {
            let index = index.to_string();
            if self.first_counterexample.is_none() {
                self.first_counterexample = Some(index.clone());
            }
            self.residuals.push(Residual { index, value: format!("{err:e}") });
            self.status = Status::Fail;
        }
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn fail(&mut self, index: impl ToString, why: impl ToString) {
        self.record_exact(index, false, why);
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
