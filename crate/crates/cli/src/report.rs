//! Report envelope and JSON/CSV emission.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

/// What a subcommand hands back: its result and, for checks, the verdict.
pub struct Outcome {
    pub result: Value,
    pub passed: Option<bool>,
}

impl Outcome {
    pub fn data(result: impl Serialize) -> Result<Outcome, CliError> {
        Ok(Outcome { result: to_value(result)?, passed: None })
    }

    pub fn check(result: impl Serialize, passed: bool) -> Result<Outcome, CliError> {
        Ok(Outcome { result: to_value(result)?, passed: Some(passed) })
    }
}

pub fn to_value(v: impl Serialize) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Internal(format!("report serialization: {e}")))
}

pub fn envelope(command: &str, seed: u64, config: Value, outcome: &Outcome) -> Value {
    json!({
        "tool": "cubeavg",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "seed": seed,
        "config": config,
        "passed": outcome.passed,
        "result": outcome.result,
    })
}

/// Rounds to 12 significant digits and prints the shortest decimal that
/// reads back as the rounded value.
fn round12(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let rounded: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
    rounded.to_string()
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                flatten(&key(k), child, rows);
            }
        }
        Value::Array(items) => {
            if items.is_empty() {
                rows.push((prefix.to_string(), String::new()));
            }
            for (i, child) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), child, rows);
            }
        }
        Value::Number(n) => {
            let text = match (n.as_i64(), n.as_u64(), n.as_f64()) {
                (Some(i), _, _) => i.to_string(),
                (_, Some(u), _) => u.to_string(),
                (_, _, Some(f)) => round12(f),
                _ => n.to_string(),
            };
            rows.push((prefix.to_string(), text));
        }
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        Value::Bool(b) => rows.push((prefix.to_string(), b.to_string())),
        Value::Null => rows.push((prefix.to_string(), String::new())),
    }
}

pub fn render(report: &Value, format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(report).map_err(|e| CliError::Internal(e.to_string()))?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let mut rows = Vec::new();
            flatten("", report, &mut rows);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["key", "value"]).map_err(|e| CliError::Internal(e.to_string()))?;
            for (k, v) in rows {
                w.write_record([k, v]).map_err(|e| CliError::Internal(e.to_string()))?;
            }
            w.into_inner().map_err(|e| CliError::Internal(e.to_string()))
        }
    }
}

/// `--output` wins; otherwise a file named after the command in the output
/// directory; otherwise standard output.
pub fn destination(output: Option<&Path>, dir: Option<&Path>, command: &str, seed: u64, format: Format) -> Option<PathBuf> {
    output
        .map(Path::to_path_buf)
        .or_else(|| dir.map(|d| d.join(format!("{command}-seed{seed}.{}", format.extension()))))
}

pub fn write(bytes: &[u8], path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
            }
            std::fs::write(p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
        }
        None => std::io::stdout().write_all(bytes).map_err(|e| CliError::Io(e.to_string())),
    }
}
