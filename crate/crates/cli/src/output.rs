//! Provenance framing and the final write.
//!
//! CSV gets two `#` lines (schema, then the config as one JSON object) before
//! the header row. JSON wraps the payload as `{schema, config, data}`.

use std::io::Write;

use serde_json::{json, Value};

use crate::config::{Format, RunConfig};
use crate::error::CliError;

pub const SCHEMA: &str = "gkw-output/1";

/// What a command produced: a CSV body and the equivalent JSON value.
pub struct Payload {
    pub csv: Vec<u8>,
    pub json: Value,
}

pub fn render(cfg: &RunConfig, payload: &Payload) -> Vec<u8> {
    let config = serde_json::to_value(cfg).expect("config serializes");
    match cfg.format {
        Format::Csv => {
            let mut out = Vec::new();
            writeln!(out, "# schema: {SCHEMA}").unwrap();
            writeln!(out, "# config: {config}").unwrap();
            out.extend_from_slice(&payload.csv);
            out
        }
        Format::Json => {
            let doc = json!({ "schema": SCHEMA, "config": config, "data": payload.json });
            let mut out = serde_json::to_vec_pretty(&doc).expect("json serializes");
            out.push(b'\n');
            out
        }
    }
}

pub fn emit(cfg: &RunConfig, payload: &Payload) -> Result<(), CliError> {
    let bytes = render(cfg, payload);
    match &cfg.out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| CliError::io(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(&bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::io(std::path::Path::new("<stdout>"), e))
        }
    }
}

/// Rows of `quantity,value,threshold,pass` shared by all validations.
#[derive(Default)]
pub struct Checks {
    rows: Vec<(String, String, String, Option<bool>)>,
}

impl Checks {
    pub fn info(&mut self, name: impl Into<String>, value: impl ToString) {
        self.rows.push((name.into(), value.to_string(), String::new(), None));
    }

    pub fn check(&mut self, name: impl Into<String>, value: impl ToString, threshold: impl ToString, pass: bool) {
        self.rows
            .push((name.into(), value.to_string(), threshold.to_string(), Some(pass)));
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.3 != Some(false))
    }

    pub fn failures(&self) -> Vec<&str> {
        self.rows
            .iter()
            .filter(|r| r.3 == Some(false))
            .map(|r| r.0.as_str())
            .collect()
    }

    pub fn payload(&self) -> Payload {
        let mut csv = Vec::new();
        writeln!(csv, "quantity,value,threshold,pass").unwrap();
        for (n, v, t, p) in &self.rows {
            let p = p.map(|b| b.to_string()).unwrap_or_default();
            writeln!(csv, "{n},{v},{t},{p}").unwrap();
        }
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|(n, v, t, p)| json!({ "quantity": n, "value": v, "threshold": t, "pass": p }))
            .collect();
        Payload {
            csv,
            json: json!({ "pass": self.passed(), "checks": rows }),
        }
    }
}
