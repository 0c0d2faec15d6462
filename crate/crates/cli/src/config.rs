//! Flat `key = value` run configuration with command-line overrides.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use phasespace::states_grids::UniformGrid;
use serde_json::{json, Value};

use crate::CliError;

pub const KEYS: &[&str] = &[
    "hbar", "alpha", "op", "state", "out", "ham", "dt", "steps", "stride", "tol", "q_count", "q_min", "q_step",
    "p_count", "p_min", "p_step",
];

#[derive(Clone, Debug, PartialEq)]
pub enum StateSpec {
    Oscillator(usize),
    Coherent(f64, f64),
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evolution {
    pub hamiltonian: String,
    pub dt: f64,
    pub steps: usize,
    pub stride: usize,
}

/// Validated configuration. `qgrid` is `None` when the state file supplies
/// it; `pgrid` is `None` when it should follow from the q-grid.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub hbar: f64,
    pub alpha: f64,
    pub state: StateSpec,
    pub operator: Option<String>,
    pub evolution: Option<Evolution>,
    pub qgrid: Option<UniformGrid>,
    pub pgrid: Option<UniformGrid>,
    pub tolerance: f64,
    pub out: PathBuf,
    /// Every key that was set, as given.
    pub raw: BTreeMap<String, String>,
}

const DEFAULT_Q_COUNT: usize = 256;
const DEFAULT_Q_HALF_EXTENT: f64 = 8.0;

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| input(format!("{}:{}: expected key = value", path.display(), idx + 1)))?;
        let key = key.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(input(format!("{}:{}: unknown key '{key}'", path.display(), idx + 1)));
        }
        let value = value.trim().trim_matches('"').to_string();
        map.insert(key, value);
    }
    Ok(map)
}

fn number(map: &BTreeMap<String, String>, key: &str) -> Result<Option<f64>, CliError> {
    map.get(key)
        .map(|v| {
            let x: f64 = v.parse().map_err(|_| input(format!("{key}: '{v}' is not a number")))?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(input(format!("{key}: must be finite")))
            }
        })
        .transpose()
}

fn count(map: &BTreeMap<String, String>, key: &str) -> Result<Option<usize>, CliError> {
    map.get(key)
        .map(|v| v.parse::<usize>().map_err(|_| input(format!("{key}: '{v}' is not a non-negative integer"))))
        .transpose()
}

fn grid(map: &BTreeMap<String, String>, axis: &str) -> Result<Option<UniformGrid>, CliError> {
    let key = |s: &str| format!("{axis}_{s}");
    let (n, min, step) = (count(map, &key("count"))?, number(map, &key("min"))?, number(map, &key("step"))?);
    if n.is_none() && min.is_none() && step.is_none() {
        return Ok(None);
    }
    let n = n.unwrap_or(DEFAULT_Q_COUNT);
    if !n.is_power_of_two() || n < 8 {
        return Err(input(format!("{}: {n} is not a power of two >= 8", key("count"))));
    }
    let (min, step) = match (min, step) {
        (Some(min), Some(step)) => (min, step),
        (None, None) => (-DEFAULT_Q_HALF_EXTENT, 2.0 * DEFAULT_Q_HALF_EXTENT / n as f64),
        (Some(min), None) => (min, -2.0 * min / n as f64),
        (None, Some(step)) => (-(n as f64) * step / 2.0, step),
    };
    UniformGrid::new(n, min, step).map(Some).map_err(|e| input(format!("{axis} grid: {e}")))
}

pub fn parse_state(text: &str) -> Result<StateSpec, CliError> {
    let (kind, arg) = text.split_once(':').unwrap_or((text, ""));
    match kind.trim() {
        "oscillator" => arg
            .trim()
            .parse()
            .map(StateSpec::Oscillator)
            .map_err(|_| input(format!("state: bad oscillator level '{arg}'"))),
        "coherent" => {
            let parts: Vec<&str> = arg.split(',').map(str::trim).collect();
            match parts.as_slice() {
                [q, p] => match (q.parse::<f64>(), p.parse::<f64>()) {
                    (Ok(q), Ok(p)) if q.is_finite() && p.is_finite() => Ok(StateSpec::Coherent(q, p)),
                    _ => Err(input(format!("state: bad coherent centre '{arg}'"))),
                },
                _ => Err(input("state: expected coherent:Q0,P0")),
            }
        }
        "file" if !arg.trim().is_empty() => Ok(StateSpec::File(PathBuf::from(arg.trim()))),
        _ => Err(input(format!("state: '{text}' is not oscillator:N, coherent:Q0,P0 or file:PATH"))),
    }
}

impl RunConfig {
    pub fn from_map(raw: BTreeMap<String, String>) -> Result<Self, CliError> {
        let hbar = number(&raw, "hbar")?.unwrap_or(1.0);
        if hbar <= 0.0 {
            return Err(input("hbar: must be positive"));
        }
        let alpha = number(&raw, "alpha")?.unwrap_or(-0.5);
        let tolerance = number(&raw, "tol")?.unwrap_or(1e-5);
        if tolerance <= 0.0 {
            return Err(input("tol: must be positive"));
        }
        let state = parse_state(raw.get("state").map(String::as_str).unwrap_or("oscillator:0"))?;
        let qgrid = grid(&raw, "q")?;
        let qgrid = match (&state, qgrid) {
            (StateSpec::File(_), g) => g,
            (_, Some(g)) => Some(g),
            (_, None) => Some(UniformGrid::symmetric(DEFAULT_Q_COUNT, DEFAULT_Q_HALF_EXTENT).expect("default grid")),
        };
        let pgrid = grid(&raw, "p")?;
        let evolution = match raw.get("ham") {
            None => None,
            Some(h) => {
                let dt = number(&raw, "dt")?.ok_or_else(|| input("dt: required with ham"))?;
                if dt <= 0.0 {
                    return Err(input("dt: must be positive"));
                }
                let steps = count(&raw, "steps")?.ok_or_else(|| input("steps: required with ham"))?;
                let stride = count(&raw, "stride")?.unwrap_or(steps.max(1));
                if stride == 0 {
                    return Err(input("stride: must be positive"));
                }
                Some(Evolution { hamiltonian: h.clone(), dt, steps, stride })
            }
        };
        Ok(RunConfig {
            hbar,
            alpha,
            state,
            operator: raw.get("op").cloned(),
            evolution,
            qgrid,
            pgrid,
            tolerance,
            out: PathBuf::from(raw.get("out").map(String::as_str).unwrap_or(".")),
            raw,
        })
    }

    /// The configuration as given, echoed into output sidecars.
    pub fn echo(&self) -> Value {
        json!(self.raw)
    }
}
