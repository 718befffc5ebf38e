use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

/// Outcome of one check: both sides of the inequality and the margin.
///
/// `slack` is `rhs − lhs`, so a passing upper-bound check has `slack ≥ 0`
/// (up to the check's tolerance).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub check: String,
    pub status: Status,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_failed: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Report {
    pub fn new(check: impl Into<String>, passed: bool, lhs: f64, rhs: f64) -> Self {
        Report {
            check: check.into(),
            status: if passed { Status::Pass } else { Status::Fail },
            lhs,
            rhs,
            slack: rhs - lhs,
            t_failed: None,
            note: None,
        }
    }

    /// A failed check whose quantities could not be computed.
    pub fn undefined(check: impl Into<String>, note: impl Into<String>) -> Self {
        Report {
            check: check.into(),
            status: Status::Fail,
            lhs: f64::NAN,
            rhs: f64::NAN,
            slack: f64::NAN,
            t_failed: None,
            note: Some(note.into()),
        }
    }

    pub fn with_t_failed(mut self, t: Option<usize>) -> Self {
        self.t_failed = t;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// rhs / lhs; how many times over the bound covers the measured value.
    pub fn slack_ratio(&self) -> f64 {
        self.rhs / self.lhs
    }
}
