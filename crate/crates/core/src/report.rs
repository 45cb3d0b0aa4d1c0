//! Machine-readable outcome of a symbolic check.

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub check: String,
    pub parameters: Value,
    pub status: CheckStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl LemmaReport {
    pub fn pass(check: impl Into<String>, parameters: Value) -> Self {
        LemmaReport {
            check: check.into(),
            parameters,
            status: CheckStatus::Pass,
            witness: None,
        }
    }

    pub fn fail(check: impl Into<String>, parameters: Value, witness: impl Into<String>) -> Self {
        LemmaReport {
            check: check.into(),
            parameters,
            status: CheckStatus::Fail,
            witness: Some(witness.into()),
        }
    }

    /// Pass when `witness` is `None`, otherwise fail with it.
    pub fn from_witness(check: impl Into<String>, parameters: Value, witness: Option<String>) -> Self {
        match witness {
            None => Self::pass(check, parameters),
            Some(w) => Self::fail(check, parameters, w),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }
}
