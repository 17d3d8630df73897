//! The JSON report envelope shared by all command-line output.

use serde::Serialize;
use serde_json::Value;

/// Fixed output shape: the command that ran, its inputs, per-item results,
/// any check failures, and wall time.
#[derive(Clone, Debug, Serialize)]
pub struct Envelope {
    pub command: String,
    pub inputs: Value,
    pub results: Vec<Value>,
    pub failures: Vec<Value>,
    pub timing_ms: u128,
}

impl Envelope {
    pub fn new(command: impl Into<String>, inputs: Value) -> Envelope {
        Envelope {
            command: command.into(),
            inputs,
            results: Vec::new(),
            failures: Vec::new(),
            timing_ms: 0,
        }
    }

    pub fn push_result(&mut self, value: Value) {
        self.results.push(value);
    }

    pub fn push_failure(&mut self, value: Value) {
        self.failures.push(value);
    }

    /// Pretty-printed JSON.
    pub fn render(&self) -> String {
        serde_json::to_string_pretty(self).expect("envelope serializes")
    }
}
