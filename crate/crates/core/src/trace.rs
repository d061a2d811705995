//! Audit records emitted by the ellipsoid driver.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub event: String,
    pub iteration: u64,
    pub k: usize,
    pub query_center: Vec<String>,
    pub delta: String,
    pub answer_flag: i8,
    pub refined: bool,
}

/// Collects records in memory; `None` disables tracing at no cost.
#[derive(Default, Debug)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
}

impl Trace {
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("trace records serialize"));
            out.push('\n');
        }
        out
    }
}
