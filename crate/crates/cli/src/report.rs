//! Command output: `key=value` text or a JSON object with the same values.

use std::time::Duration;

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Ordered `key=value` pairs. Values are exact strings: reduced fractions,
/// `inf`, booleans, words.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Fields(pub Vec<(String, String)>);

impl Fields {
    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.0.push((key.to_string(), value.to_string()));
    }

    fn to_json(&self) -> serde_json::Map<String, serde_json::Value> {
        self.0
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
            .collect()
    }

    fn to_text(&self) -> String {
        self.0
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub command: String,
    /// SHA-256 of the input file, if any.
    pub digest: Option<String>,
    /// The answer, printed on the first line.
    pub result: Fields,
    /// Witnesses and automaton sizes, one per line.
    pub details: Fields,
    /// Free-form trailing output, such as a dumped automaton.
    pub body: Option<String>,
    pub elapsed: Duration,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    command: &'a str,
    input_sha256: Option<&'a str>,
    result: serde_json::Map<String, serde_json::Value>,
    details: serde_json::Map<String, serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    body: Option<&'a str>,
    time_ms: u128,
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunReport {
    pub fn new(command: String, digest: Option<String>) -> Self {
        RunReport {
            command,
            digest,
            result: Fields::default(),
            details: Fields::default(),
            body: None,
            elapsed: Duration::ZERO,
        }
    }

    pub fn render(&self, json: bool) -> String {
        if json {
            let report = JsonReport {
                command: &self.command,
                input_sha256: self.digest.as_deref(),
                result: self.result.to_json(),
                details: self.details.to_json(),
                body: self.body.as_deref(),
                time_ms: self.elapsed.as_millis(),
            };
            let mut out = serde_json::to_string_pretty(&report).expect("serializable report");
            out.push('\n');
            return out;
        }
        let mut out = self.result.to_text();
        out.push('\n');
        for (k, v) in &self.details.0 {
            out.push_str(&format!("{k}={v}\n"));
        }
        if let Some(d) = &self.digest {
            out.push_str(&format!("input-sha256={d}\n"));
        }
        out.push_str(&format!("time-ms={}\n", self.elapsed.as_millis()));
        if let Some(body) = &self.body {
            out.push_str(body);
        }
        out
    }
}
