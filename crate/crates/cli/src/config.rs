//! Flags, JSON config files, and their resolution into a fully specified run.

use std::collections::BTreeMap;
use std::fs;

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::CliError;

/// Every experiment parameter. The JSON config schema uses the same names.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Flags {
    /// JSON config file; flags given on the command line override it.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<String>,
    /// Output path; stdout when absent.
    #[arg(long)]
    #[serde(skip)]
    pub output: Option<String>,

    /// Point literal, comma separated: `p/q`, decimals, `a+b*sqrt(c)`, `sqrt2m1`, `golden`, `liouville10(n)`.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<String>,
    /// Extra coordinates appended to `x` for extension checks.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<String>,
    /// Inhomogeneous shift.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<String>,
    /// Approximation function literal: `q^-a`, `q^-a*log^-b`, `const:c`, `phi:d=D`, `max(A,B)`, `table:path`.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi: Option<String>,
    /// Rational threshold; `boundary` means `N^(-1/tau)`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<String>,
    #[arg(long = "N")]
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[arg(long = "M")]
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    #[arg(long = "H")]
    #[serde(rename = "H", skip_serializing_if = "Option::is_none")]
    pub h: Option<u64>,
    #[arg(long = "Qmax")]
    #[serde(rename = "Qmax", skip_serializing_if = "Option::is_none")]
    pub qmax: Option<u64>,
    #[arg(long = "Q0")]
    #[serde(rename = "Q0", skip_serializing_if = "Option::is_none")]
    pub q0: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<u32>,
    /// Fiber dimension.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    /// Block base `k` of `k^j`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kbase: Option<u64>,
    /// Comma separated list of block bases to try.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ks: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jlo: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jhi: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slack: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<String>,
    #[arg(long = "search-bound")]
    #[serde(rename = "search-bound", skip_serializing_if = "Option::is_none")]
    pub search_bound: Option<String>,
    #[arg(long = "nmin")]
    #[serde(rename = "nmin", skip_serializing_if = "Option::is_none")]
    pub n_min: Option<u64>,
    #[arg(long = "kappa-floor")]
    #[serde(rename = "kappa-floor", skip_serializing_if = "Option::is_none")]
    pub kappa_floor: Option<String>,
    /// `tau_D`, `omega_D` or `omega_S`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    /// `top:F`, `top-half` or `slope`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aggregation: Option<String>,
    /// `grid` or `monte-carlo`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampling: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
    #[arg(long = "max-scan")]
    #[serde(rename = "max-scan", skip_serializing_if = "Option::is_none")]
    pub max_scan: Option<u64>,
    #[arg(long = "max-cells")]
    #[serde(rename = "max-cells", skip_serializing_if = "Option::is_none")]
    pub max_cells: Option<u64>,
    #[arg(long = "max-events")]
    #[serde(rename = "max-events", skip_serializing_if = "Option::is_none")]
    pub max_events: Option<u64>,
    /// `csv` or `json`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
}

pub const COMMANDS: &[&str] = &[
    "count",
    "series",
    "exponent",
    "transference",
    "vwa",
    "lattice",
    "nalpha",
    "cover",
    "ubiquity",
    "select-k",
    "measure",
    "phi-contrast",
    "subspace",
];

const SCAN: u64 = 100_000_000;

/// Keys a command accepts, with defaults where one exists.
pub fn schema(command: &str) -> Option<(Vec<&'static str>, Map<String, Value>)> {
    let (keys, defaults): (Vec<&str>, Value) = match command {
        "count" => (
            vec!["x", "gamma", "delta", "psi", "N", "M", "kbase", "jhi", "max-scan"],
            json!({"M": 0, "max-scan": SCAN}),
        ),
        "series" => (vec!["x", "psi", "d", "Qmax", "max-scan"], json!({"max-scan": SCAN})),
        "exponent" => (
            vec!["x", "y", "kind", "H", "Qmax", "aggregation", "max-cells"],
            json!({"kind": "tau_D", "aggregation": "top:0.5", "max-cells": SCAN}),
        ),
        "transference" => (
            vec!["x", "H", "Qmax", "slack", "aggregation", "max-cells"],
            json!({"slack": "0.05", "aggregation": "top:0.5", "max-cells": SCAN}),
        ),
        "vwa" => (vec!["x", "y", "epsilon", "Qmax", "H", "max-scan"], json!({"H": 1000, "max-scan": SCAN})),
        "lattice" => (
            vec!["x", "N", "delta", "search-bound", "precision", "max-cells", "max-scan"],
            json!({"search-bound": "8", "precision": 64, "max-cells": SCAN, "max-scan": SCAN}),
        ),
        "nalpha" => (
            vec!["x", "tau", "N", "delta", "nmin", "max-scan"],
            json!({"delta": "boundary", "nmin": 1000, "max-scan": SCAN}),
        ),
        "cover" => (vec!["x", "psi", "N", "max-events", "max-scan"], json!({"max-events": 400_000_000u64, "max-scan": SCAN})),
        "ubiquity" => (
            vec!["x", "psi", "d", "kbase", "c", "jlo", "jhi", "kappa-floor", "max-events", "max-scan"],
            json!({"jlo": 1, "kappa-floor": "1/20", "max-events": 400_000_000u64, "max-scan": SCAN}),
        ),
        "select-k" => (
            vec!["x", "psi", "d", "ks", "jlo", "jhi", "kappa-floor", "max-events", "max-scan"],
            json!({"ks": "2,4,8,16,32,64", "jlo": 1, "kappa-floor": "1/20", "max-events": 400_000_000u64, "max-scan": SCAN}),
        ),
        "measure" => (
            vec!["x", "psi", "k", "Q0", "Qmax", "sampling", "points", "seed", "max-scan"],
            json!({"k": 1, "Q0": 0, "sampling": "grid", "points": 10_000, "max-scan": SCAN}),
        ),
        "phi-contrast" => (
            vec!["x", "d", "Q0", "Qmax", "sampling", "points", "seed", "max-scan"],
            json!({"sampling": "grid", "points": 10_000, "max-scan": SCAN}),
        ),
        "subspace" => (
            vec!["x", "psi", "k", "Q0", "Qmax", "sampling", "points", "seed", "max-scan"],
            json!({"k": 2, "Q0": 0, "sampling": "grid", "points": 10_000, "max-scan": SCAN}),
        ),
        _ => return None,
    };
    let mut keys = keys;
    keys.push("format");
    let mut defaults = match defaults {
        Value::Object(m) => m,
        _ => Map::new(),
    };
    defaults.insert("format".into(), json!("csv"));
    Some((keys, defaults))
}

/// A command with every parameter it uses.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolved {
    pub command: String,
    pub flags: Flags,
    /// The resolved parameters, as echoed in the output.
    pub echo: BTreeMap<String, Value>,
    pub defaults: BTreeMap<String, Value>,
    pub output: Option<String>,
}

fn to_map(f: &Flags) -> Result<Map<String, Value>, CliError> {
    match serde_json::to_value(f).map_err(|e| CliError::Config(e.to_string()))? {
        Value::Object(m) => Ok(m),
        _ => Ok(Map::new()),
    }
}

/// Reads a JSON config file into flags.
pub fn load_config(path: &str) -> Result<Flags, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{path}: {e}")))
}

/// Merges defaults, the config file and the flags, in increasing priority.
pub fn resolve(command: &str, flags: &Flags) -> Result<Resolved, CliError> {
    let (keys, defaults) =
        schema(command).ok_or_else(|| CliError::Config(format!("unknown command '{command}'")))?;
    let mut merged = defaults.clone();
    if let Some(path) = &flags.config {
        merged.extend(to_map(&load_config(path)?)?);
    }
    merged.extend(to_map(flags)?);
    if let Some(bad) = merged.keys().find(|k| !keys.contains(&k.as_str())) {
        return Err(CliError::Config(format!("'{bad}' is not a parameter of '{command}'")));
    }
    let typed: Flags =
        serde_json::from_value(Value::Object(merged.clone())).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(Resolved {
        command: command.to_string(),
        flags: typed,
        echo: merged.into_iter().collect(),
        defaults: defaults.into_iter().collect(),
        output: flags.output.clone(),
    })
}

/// Rebuilds a run from an echoed config.
pub fn from_echo(command: &str, echo: &Map<String, Value>) -> Result<Resolved, CliError> {
    let flags: Flags =
        serde_json::from_value(Value::Object(echo.clone())).map_err(|e| CliError::Config(e.to_string()))?;
    resolve(command, &flags)
}

pub fn require<'a, T>(v: &'a Option<T>, name: &str, command: &str) -> Result<&'a T, CliError> {
    v.as_ref().ok_or_else(|| CliError::Config(format!("'{command}' needs --{name}")))
}
