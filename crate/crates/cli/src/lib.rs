//! Experiment harness: resolves a configuration, runs the owning module,
//! and writes deterministic CSV or JSON that `replay` can re-check byte for byte.

pub mod commands;
pub mod config;

use std::collections::BTreeMap;
use std::fs;

use serde_json::{json, Map, Value};

pub use config::{resolve, Flags, Resolved};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] dioph::Error),
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("drift detected:\n{0}")]
    Drift(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use dioph::Error as E;
        match self {
            CliError::Core(E::BudgetExceeded(_)) => 3,
            CliError::Core(E::PrecisionExhausted { .. }) => 4,
            CliError::Core(E::Io(_)) | CliError::Io(_) => 1,
            CliError::Core(_) | CliError::Config(_) => 2,
            CliError::Drift(_) => 5,
        }
    }
}

/// A finished run: config echo, result table and verdict summary.
#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub command: String,
    pub echo: BTreeMap<String, Value>,
    pub defaults: BTreeMap<String, Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub verdict: BTreeMap<String, Value>,
}

fn pretty(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).unwrap_or_default();
    s.push('\n');
    s.into_bytes()
}

impl Output {
    pub fn format(&self) -> &str {
        self.echo.get("format").and_then(Value::as_str).unwrap_or("csv")
    }

    fn meta(&self) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("command".into(), json!(self.command));
        m.insert("config".into(), json!(self.echo));
        m.insert("defaults".into(), json!(self.defaults));
        m.insert("verdict".into(), json!(self.verdict));
        m.insert("version".into(), json!(VERSION));
        m
    }

    pub fn csv_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&self.columns).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn sidecar_bytes(&self) -> Vec<u8> {
        pretty(&Value::Object(self.meta()))
    }

    pub fn json_bytes(&self) -> Vec<u8> {
        let mut m = self.meta();
        m.insert("table".into(), json!({"columns": self.columns, "rows": self.rows}));
        pretty(&Value::Object(m))
    }

    /// `(path, bytes)` for every file of this result under `path`.
    pub fn files(&self, path: &str) -> Result<Vec<(String, Vec<u8>)>, CliError> {
        match self.format() {
            "json" => Ok(vec![(path.to_string(), self.json_bytes())]),
            "csv" => Ok(vec![(path.to_string(), self.csv_bytes()?), (sidecar(path), self.sidecar_bytes())]),
            other => Err(CliError::Core(dioph::Error::Parse(format!("bad format '{other}': expected csv or json")))),
        }
    }

    pub fn primary_bytes(&self) -> Result<Vec<u8>, CliError> {
        match self.format() {
            "json" => Ok(self.json_bytes()),
            _ => self.csv_bytes(),
        }
    }

    pub fn write(&self, path: &str) -> Result<(), CliError> {
        for (p, bytes) in self.files(path)? {
            fs::write(&p, bytes).map_err(|e| CliError::Io(format!("{p}: {e}")))?;
        }
        Ok(())
    }
}

pub fn sidecar(path: &str) -> String {
    format!("{path}.config.json")
}

pub fn run(r: &Resolved) -> Result<Output, CliError> {
    let out = commands::dispatch(r)?;
    out.files("-")?;
    Ok(out)
}

/// Runs and persists to the configured output path.
pub fn execute(r: &Resolved) -> Result<Output, CliError> {
    let out = run(r)?;
    if let Some(p) = &r.output {
        out.write(p)?;
    }
    Ok(out)
}

fn read(path: &str) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Io(format!("{path}: {e}")))
}

fn parse_meta(bytes: &[u8], path: &str) -> Result<Map<String, Value>, CliError> {
    match serde_json::from_slice::<Value>(bytes) {
        Ok(Value::Object(m)) => Ok(m),
        _ => Err(CliError::Config(format!("{path} does not hold a result document"))),
    }
}

fn first_difference(a: &[u8], b: &[u8]) -> String {
    let (la, lb) = (String::from_utf8_lossy(a), String::from_utf8_lossy(b));
    for (i, (x, y)) in la.lines().zip(lb.lines()).enumerate() {
        if x != y {
            return format!("line {}: recorded '{x}', replayed '{y}'", i + 1);
        }
    }
    format!("recorded {} lines, replayed {} lines", la.lines().count(), lb.lines().count())
}

/// Field-level differences between two objects.
fn field_diff(label: &str, old: Option<&Value>, new: &BTreeMap<String, Value>) -> Vec<String> {
    let empty = Map::new();
    let old = old.and_then(Value::as_object).unwrap_or(&empty);
    let mut keys: Vec<&String> = old.keys().chain(new.keys()).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .filter_map(|k| {
            let (a, b) = (old.get(k), new.get(k));
            (a != b).then(|| format!("{label}.{k}: {} -> {}", show(a), show(b)))
        })
        .collect()
}

fn show(v: Option<&Value>) -> String {
    v.map(|v| v.to_string()).unwrap_or_else(|| "(absent)".into())
}

/// Re-executes a recorded run; `Ok` only when every file is byte-identical
/// and the defaults in force are unchanged.
pub fn replay(path: &str) -> Result<Output, CliError> {
    let recorded = read(path)?;
    let (meta, files) = match parse_meta(&recorded, path) {
        Ok(m) if m.contains_key("table") => (m, vec![(path.to_string(), recorded.clone())]),
        _ => {
            let sc = sidecar(path);
            let sb = read(&sc)?;
            (parse_meta(&sb, &sc)?, vec![(path.to_string(), recorded.clone()), (sc, sb)])
        }
    };
    let command = meta.get("command").and_then(Value::as_str).ok_or_else(|| CliError::Config("no command recorded".into()))?;
    let echo = meta.get("config").and_then(Value::as_object).ok_or_else(|| CliError::Config("no config echo".into()))?;
    let resolved = config::from_echo(command, echo)?;
    let out = run(&resolved)?;
    let mut diffs = field_diff("defaults", meta.get("defaults"), &out.defaults);
    for ((p, old), (_, new)) in files.iter().zip(out.files(path)?) {
        if *old != new {
            diffs.push(format!("{p}: {}", first_difference(old, &new)));
        }
    }
    if diffs.is_empty() {
        Ok(out)
    } else {
        Err(CliError::Drift(diffs.join("\n")))
    }
}
