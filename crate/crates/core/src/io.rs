//! CSV and JSON file formats.
//!
//! * states: CSV `q,re,im` or `p,re,im`
//! * density matrices: CSV `i,j,re,im` plus a `.json` sidecar
//!   `{count, minimum, step, hbar}`
//! * distribution fields: CSV `q,p,re,im` plus a `.json` sidecar
//!   `{alpha, hbar, qgrid, pgrid, ...}`
//!
//! Floats are written with 17 significant digits so files round-trip
//! bit-exactly and repeated runs produce identical bytes.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::distributions::DistributionField;
use crate::states_grids::{DensityMatrix, MomentumState, PositionState, UniformGrid};
use crate::{Error, Result};

/// Fixed 17-significant-digit rendering.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Compact JSON formatter printing every float with [`format_float`].
struct FixedDigits;

impl serde_json::ser::Formatter for FixedDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            writer.write_all(format_float(value).as_bytes())
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedDigits);
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json writes utf-8"))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json_string(value)?)?;
    Ok(())
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

fn grid_json(g: &UniformGrid) -> Value {
    json!({"count": g.count, "minimum": g.minimum, "step": g.step})
}

fn format_error(path: &Path, line: usize, message: impl std::fmt::Display) -> Error {
    Error::Format(format!("{}:{}: {}", path.display(), line, message))
}

/// Rows of a CSV with a fixed header; every field parsed as f64.
fn read_rows(path: &Path, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let expected = header.join(",");
    match lines.next() {
        Some((_, h)) if h.trim() == expected => {}
        Some((_, h)) => return Err(format_error(path, 1, format!("header '{}' (expected '{expected}')", h.trim()))),
        None => return Err(format_error(path, 1, "empty file")),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != header.len() {
            return Err(format_error(path, idx + 1, format!("{} fields (expected {})", fields.len(), header.len())));
        }
        let row = fields
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| format_error(path, idx + 1, format!("not a number: '{f}'"))))
            .collect::<Result<Vec<f64>>>()?;
        if row.iter().any(|v| !v.is_finite()) {
            return Err(format_error(path, idx + 1, "non-finite value"));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(format_error(path, 2, "no data rows"));
    }
    Ok(rows)
}

fn grid_from_points(path: &Path, points: &[f64]) -> Result<UniformGrid> {
    let count = points.len();
    if count < 2 {
        return Err(format_error(path, 2, "need at least two samples"));
    }
    let step = (points[count - 1] - points[0]) / (count - 1) as f64;
    for (k, x) in points.iter().enumerate() {
        let expected = points[0] + k as f64 * step;
        if (x - expected).abs() > 1e-9 * step.abs().max(1.0) {
            return Err(format_error(path, k + 2, "grid is not uniform and increasing"));
        }
    }
    UniformGrid::new(count, points[0], step).map_err(|e| format_error(path, 2, e))
}

fn write_wavefunction(path: &Path, var: &str, grid: &UniformGrid, samples: &Array1<C64>) -> Result<()> {
    let mut out = String::with_capacity(samples.len() * 72);
    out.push_str(&format!("{var},re,im\n"));
    for (k, z) in samples.iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", format_float(grid.point(k)), format_float(z.re), format_float(z.im)));
    }
    fs::write(path, out)?;
    Ok(())
}

fn read_wavefunction(path: &Path, var: &str) -> Result<(UniformGrid, Array1<C64>)> {
    let rows = read_rows(path, &[var, "re", "im"])?;
    let points: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let grid = grid_from_points(path, &points)?;
    Ok((grid, rows.iter().map(|r| C64::new(r[1], r[2])).collect()))
}

pub fn write_position_state(path: &Path, psi: &PositionState) -> Result<()> {
    write_wavefunction(path, "q", &psi.grid, &psi.samples)
}

pub fn write_momentum_state(path: &Path, phi: &MomentumState) -> Result<()> {
    write_wavefunction(path, "p", &phi.grid, &phi.samples)
}

/// Reads a `q,re,im` file. The grid is inferred from the `q` column.
pub fn read_position_state(path: &Path, hbar: f64) -> Result<PositionState> {
    let (grid, samples) = read_wavefunction(path, "q")?;
    PositionState::new(grid, samples, hbar)
}

pub fn read_momentum_state(path: &Path, hbar: f64) -> Result<MomentumState> {
    let (grid, samples) = read_wavefunction(path, "p")?;
    MomentumState::new(grid, samples, hbar)
}

pub fn write_density(path: &Path, rho: &DensityMatrix) -> Result<()> {
    let mut out = String::from("i,j,re,im\n");
    for ((i, j), z) in rho.entries().indexed_iter() {
        out.push_str(&format!("{i},{j},{},{}\n", format_float(z.re), format_float(z.im)));
    }
    fs::write(path, out)?;
    let g = rho.grid();
    write_json(
        &sidecar_path(path),
        &json!({"count": g.count, "minimum": g.minimum, "step": g.step, "hbar": rho.hbar()}),
    )
}

fn read_sidecar(path: &Path) -> Result<Value> {
    let side = sidecar_path(path);
    let text = fs::read_to_string(&side)?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", side.display())))
}

fn json_f64(v: &Value, key: &str, path: &Path) -> Result<f64> {
    v.get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::Format(format!("{}: missing number '{key}'", sidecar_path(path).display())))
}

fn json_grid(v: &Value, path: &Path) -> Result<UniformGrid> {
    let count = v
        .get("count")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Format(format!("{}: missing 'count'", sidecar_path(path).display())))?;
    UniformGrid::new(count as usize, json_f64(v, "minimum", path)?, json_f64(v, "step", path)?)
}

pub fn read_density(path: &Path) -> Result<DensityMatrix> {
    let side = read_sidecar(path)?;
    let grid = json_grid(&side, path)?;
    let hbar = json_f64(&side, "hbar", path)?;
    let n = grid.count;
    let rows = read_rows(path, &["i", "j", "re", "im"])?;
    let mut entries = Array2::<C64>::zeros((n, n));
    let mut seen = Array2::<bool>::from_elem((n, n), false);
    for (line, r) in rows.iter().enumerate() {
        let (i, j) = (r[0] as usize, r[1] as usize);
        if r[0].fract() != 0.0 || r[1].fract() != 0.0 || i >= n || j >= n || r[0] < 0.0 || r[1] < 0.0 {
            return Err(format_error(path, line + 2, "index out of range"));
        }
        entries[[i, j]] = C64::new(r[2], r[3]);
        seen[[i, j]] = true;
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::Format(format!("{}: missing matrix entries", path.display())));
    }
    DensityMatrix::new(grid, entries, hbar)
}

/// Writes the field and its sidecar; `extra` keys (e.g. `time`, run
/// configuration) are merged into the sidecar.
pub fn write_field(path: &Path, field: &DistributionField, extra: Option<&Map<String, Value>>) -> Result<()> {
    let mut out = String::with_capacity(field.values.len() * 96);
    out.push_str("q,p,re,im\n");
    for ((i, j), z) in field.values.indexed_iter() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            format_float(field.qgrid.point(i)),
            format_float(field.pgrid.point(j)),
            format_float(z.re),
            format_float(z.im)
        ));
    }
    fs::write(path, out)?;
    let mut side = Map::new();
    side.insert("alpha".into(), json!(field.alpha));
    side.insert("hbar".into(), json!(field.hbar));
    side.insert("qgrid".into(), grid_json(&field.qgrid));
    side.insert("pgrid".into(), grid_json(&field.pgrid));
    if let Some(extra) = extra {
        for (k, v) in extra {
            side.insert(k.clone(), v.clone());
        }
    }
    write_json(&sidecar_path(path), &Value::Object(side))
}

/// Reads a field and returns it with the full sidecar.
pub fn read_field(path: &Path) -> Result<(DistributionField, Value)> {
    let side = read_sidecar(path)?;
    let missing = |k: &str| Error::Format(format!("{}: missing '{k}'", sidecar_path(path).display()));
    let qgrid = json_grid(side.get("qgrid").ok_or_else(|| missing("qgrid"))?, path)?;
    let pgrid = json_grid(side.get("pgrid").ok_or_else(|| missing("pgrid"))?, path)?;
    let alpha = json_f64(&side, "alpha", path)?;
    let hbar = json_f64(&side, "hbar", path)?;
    let rows = read_rows(path, &["q", "p", "re", "im"])?;
    if rows.len() != qgrid.count * pgrid.count {
        return Err(Error::Format(format!(
            "{}: {} rows for a {}x{} grid",
            path.display(),
            rows.len(),
            qgrid.count,
            pgrid.count
        )));
    }
    let values = Array2::from_shape_fn((qgrid.count, pgrid.count), |(i, j)| {
        let r = &rows[i * pgrid.count + j];
        C64::new(r[2], r[3])
    });
    Ok((DistributionField::new(qgrid, pgrid, values, alpha, hbar)?, side))
}
