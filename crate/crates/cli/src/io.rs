//! File formats and all-or-nothing output.
//!
//! Densities are CSV with a header and columns `x,density` (cell centers of
//! a uniform grid, increasing). Costs are `x,y,cost` over every pair of
//! centers. Atom lists are `x,mass`.

use std::fs;
use std::path::{Path, PathBuf};

use entropic_ot::{AtomicMeasure, Atom, CostField, Grid1D, GridFunction, GridMeasure, DEFAULT_MASS_TOL};
use serde_json::Value;

use crate::error::{CliError, CliResult};

/// Relative slack, in cell widths, when matching coordinates to centers.
const CENTER_TOL: f64 = 1e-6;

fn format_err(path: &Path, msg: impl Into<String>) -> CliError {
    CliError::Format { path: path.to_path_buf(), msg: msg.into() }
}

/// Reads the numeric columns of a headed CSV file, checking the width.
fn read_rows(path: &Path, width: usize) -> CliResult<Vec<Vec<f64>>> {
    if !path.is_file() {
        return Err(CliError::MissingFile(vec![path.to_path_buf()]));
    }
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| format_err(path, e.to_string()))?;
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| format_err(path, e.to_string()))?;
        if record.len() != width {
            return Err(format_err(path, format!("row {}: expected {width} columns, found {}", line + 2, record.len())));
        }
        let row = record
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| format_err(path, format!("row {}: `{f}` is not a number", line + 2))))
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(format_err(path, "no data rows"));
    }
    Ok(rows)
}

fn read_grid_columns(path: &Path) -> CliResult<(Grid1D, Vec<f64>)> {
    let rows = read_rows(path, 2)?;
    let xs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let grid = Grid1D::from_centers(&xs, CENTER_TOL).map_err(|e| format_err(path, e.to_string()))?;
    Ok((grid, rows.iter().map(|r| r[1]).collect()))
}

/// `x,density` file as a nonnegative grid measure.
pub fn read_density(path: &Path) -> CliResult<GridMeasure> {
    let (grid, values) = read_grid_columns(path)?;
    GridMeasure::new(grid, values).map_err(|e| format_err(path, e.to_string()))
}

/// `x,value` file as a signed grid function.
pub fn read_function(path: &Path) -> CliResult<GridFunction> {
    let (grid, values) = read_grid_columns(path)?;
    GridFunction::new(grid, values).map_err(|e| format_err(path, e.to_string()))
}

/// `x,mass` file as an atomic probability measure.
pub fn read_atoms(path: &Path) -> CliResult<AtomicMeasure> {
    let atoms = read_rows(path, 2)?
        .into_iter()
        .map(|r| Atom { location: r[0], mass: r[1] })
        .collect();
    AtomicMeasure::new(atoms, DEFAULT_MASS_TOL).map_err(|e| format_err(path, e.to_string()))
}

fn cell_index(grid: &Grid1D, x: f64) -> Option<usize> {
    let t = (x - grid.lo()) / grid.h() - 0.5;
    let i = t.round();
    if i < 0.0 || i >= grid.len() as f64 || (t - i).abs() > CENTER_TOL {
        return None;
    }
    Some(i as usize)
}

/// `x,y,cost` file, one row per pair of centers in any order.
pub fn read_cost(path: &Path, grid1: Grid1D, grid2: Grid1D) -> CliResult<CostField> {
    let rows = read_rows(path, 3)?;
    let (n1, n2) = (grid1.len(), grid2.len());
    let mut values = vec![f64::NAN; n1 * n2];
    for r in &rows {
        let i = cell_index(&grid1, r[0]).ok_or_else(|| format_err(path, format!("x = {} is not a center of the first grid", r[0])))?;
        let j = cell_index(&grid2, r[1]).ok_or_else(|| format_err(path, format!("y = {} is not a center of the second grid", r[1])))?;
        if !values[i * n2 + j].is_nan() {
            return Err(format_err(path, format!("duplicate entry for ({}, {})", r[0], r[1])));
        }
        values[i * n2 + j] = r[2];
    }
    if let Some(k) = values.iter().position(|v| v.is_nan()) {
        return Err(format_err(
            path,
            format!("no entry for ({}, {})", grid1.center(k / n2), grid2.center(k % n2)),
        ));
    }
    CostField::from_values(grid1, grid2, values).map_err(|e| format_err(path, e.to_string()))
}

/// Shortest round-trip decimal; non-finite values as `nan`, `inf`, `-inf`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        serde_json::to_string(&x).expect("finite floats serialize")
    }
}

/// CSV document with a fixed header.
pub fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Pretty JSON; object keys come out sorted.
pub fn json_bytes(v: &Value) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("values serialize");
    out.push(b'\n');
    out
}

/// Output files of one run, written together or not at all.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, path: PathBuf, bytes: Vec<u8>) {
        self.files.push((path, bytes));
    }

    pub fn paths(&self) -> impl Iterator<Item = &Path> {
        self.files.iter().map(|(p, _)| p.as_path())
    }

    /// Stages every file as a temporary next to its target, then renames
    /// them into place. A failure while staging leaves no output behind.
    pub fn commit(self) -> CliResult<()> {
        let mut staged = Vec::with_capacity(self.files.len());
        for (path, bytes) in &self.files {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
                _ => PathBuf::from("."),
            };
            fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
            let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| CliError::io(path, e))?;
            std::io::Write::write_all(&mut tmp, bytes).map_err(|e| CliError::io(path, e))?;
            tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
            staged.push((tmp, path));
        }
        for (tmp, path) in staged {
            tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
        }
        Ok(())
    }
}
