//! Dense CSV matrices, masks and per-entry variances.
//!
//! A matrix file has one line per row and comma-separated cells. An empty
//! cell or the literal `NA` is unobserved; every other cell must be a finite,
//! nonzero decimal.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use entrywise_core::{Mask, NoiseSpec};

/// A rectangular grid of optional cells, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<Option<T>>,
}

impl<T: Copy> Grid<T> {
    pub fn get(&self, i: usize, j: usize) -> Option<T> {
        self.cells[i * self.cols + j]
    }

    pub fn known(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_some())
            .map(|(k, _)| (k / self.cols, k % self.cols))
    }
}

pub type MatrixFile = Grid<f64>;

fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell == "NA"
}

/// Parses CSV text into a grid; `parse` sees each present cell with its position.
fn parse_grid<T>(
    text: &str,
    mut parse: impl FnMut(&str, usize, usize) -> Result<Option<T>>,
) -> Result<Grid<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = 0;
    let mut cols = None;
    let mut cells = Vec::new();
    for record in reader.records() {
        let record = record.with_context(|| format!("malformed CSV near row {rows}"))?;
        match cols {
            None => cols = Some(record.len()),
            Some(c) if c != record.len() => {
                bail!("row {rows} has {} cells, expected {c}", record.len())
            }
            _ => {}
        }
        for (j, cell) in record.iter().enumerate() {
            cells.push(if is_missing(cell) {
                None
            } else {
                parse(cell, rows, j)?
            });
        }
        rows += 1;
    }
    let cols = cols.unwrap_or(0);
    if rows == 0 || cols == 0 {
        bail!("matrix is empty");
    }
    Ok(Grid { rows, cols, cells })
}

pub fn parse_matrix(text: &str) -> Result<MatrixFile> {
    parse_grid(text, |cell, i, j| {
        let v: f64 = cell.parse().map_err(|_| {
            anyhow::anyhow!("row {i}, column {j}: cannot parse '{cell}' as a number")
        })?;
        if !v.is_finite() || v == 0.0 {
            bail!("row {i}, column {j}: observed value must be finite and nonzero, got {cell}");
        }
        Ok(Some(v))
    })
}

/// A 0/1 mask; only `1` cells are known.
pub fn parse_mask(text: &str) -> Result<Mask> {
    let grid = parse_grid(text, |cell, i, j| match cell {
        "1" => Ok(Some(())),
        "0" => Ok(None),
        _ => bail!("row {i}, column {j}: mask cells must be 0 or 1, got '{cell}'"),
    })?;
    Ok(Mask::new(grid.rows, grid.cols, grid.known())?)
}

pub fn parse_sigma(text: &str) -> Result<Grid<f64>> {
    parse_grid(text, |cell, i, j| {
        let v: f64 = cell
            .parse()
            .map_err(|_| anyhow::anyhow!("row {i}, column {j}: cannot parse variance '{cell}'"))?;
        if !v.is_finite() || v < 0.0 {
            bail!("row {i}, column {j}: variance must be finite and >= 0, got {cell}");
        }
        Ok(Some(v))
    })
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn read_matrix(path: &Path) -> Result<MatrixFile> {
    parse_matrix(&read(path)?).with_context(|| format!("in {}", path.display()))
}

pub fn read_mask(path: &Path) -> Result<Mask> {
    parse_mask(&read(path)?).with_context(|| format!("in {}", path.display()))
}

impl MatrixFile {
    pub fn mask(&self) -> Result<Mask> {
        Ok(Mask::new(self.rows, self.cols, self.known())?)
    }
}

/// Noise variances: one broadcast value or a per-entry CSV.
#[derive(Debug, Clone, PartialEq)]
pub enum SigmaSpec {
    Scalar(f64),
    PerEntry(Grid<f64>),
}

impl SigmaSpec {
    pub fn from_file(path: &Path) -> Result<Self> {
        let grid = parse_sigma(&read(path)?).with_context(|| format!("in {}", path.display()))?;
        Ok(SigmaSpec::PerEntry(grid))
    }

    /// Checks coverage of `mask` and converts to the estimator's noise type.
    pub fn resolve(&self, mask: &Mask) -> Result<NoiseSpec> {
        match self {
            SigmaSpec::Scalar(s) => Ok(NoiseSpec::uniform(*s)?),
            SigmaSpec::PerEntry(grid) => {
                if (grid.rows, grid.cols) != (mask.rows(), mask.cols()) {
                    bail!(
                        "sigma file is {}x{}, matrix is {}x{}",
                        grid.rows,
                        grid.cols,
                        mask.rows(),
                        mask.cols()
                    );
                }
                for &(i, j) in mask.known() {
                    if grid.get(i, j).is_none() {
                        bail!("row {i}, column {j}: no variance for an observed entry");
                    }
                }
                Ok(NoiseSpec::per_entry(
                    grid.rows,
                    grid.cols,
                    grid.cells.clone(),
                )?)
            }
        }
    }
}

/// Shortest round-trip decimal; `inf` for infinities and `NA` for NaN.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "NA".to_string()
    } else if v == f64::INFINITY {
        "inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else if v != 0.0 && !(1e-5..1e16).contains(&v.abs()) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

/// Dense CSV text, one line per row.
pub fn to_csv(rows: usize, cols: usize, cell: impl Fn(usize, usize) -> String) -> String {
    let mut out = String::new();
    for i in 0..rows {
        let line: Vec<String> = (0..cols).map(|j| cell(i, j)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}
