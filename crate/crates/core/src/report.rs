use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
    ReportOnly,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn is_failure(self) -> bool {
        self == Status::Fail
    }
}

/// Outcome of one theorem-level check. `payload` carries residuals,
/// certificates and recovered objects in canonical polynomial text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub task: String,
    pub system: String,
    pub subject: String,
    pub status: Status,
    pub payload: BTreeMap<String, Value>,
    pub wall_time_ms: f64,
    pub version: String,
}

impl VerificationReport {
    pub fn new(task: &str, system: &str, subject: &str) -> Self {
        VerificationReport {
            task: task.to_string(),
            system: system.to_string(),
            subject: subject.to_string(),
            status: Status::ReportOnly,
            payload: BTreeMap::new(),
            wall_time_ms: 0.0,
            version: ARTIFACT_VERSION.to_string(),
        }
    }

    pub fn with_status(mut self, status: Status) -> Self {
        self.status = status;
        self
    }

    pub fn put(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.payload.insert(key.to_string(), value.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn timed(mut self, start: Instant) -> Self {
        self.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
        self
    }
}

/// Long residuals are clipped in reports.
pub fn clip(s: String, max: usize) -> String {
    if s.len() <= max {
        s
    } else {
        let mut cut = max;
        while !s.is_char_boundary(cut) {
            cut -= 1;
        }
        format!("{}... ({} bytes total)", &s[..cut], s.len())
    }
}
