//! The subcommands, as functions from parsed inputs to printable output.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use entrywise_core::simulation::{
    bin_error_vs_variance, noise_sweep, spearman, Method, SweepConfig, TrialReport,
};
use entrywise_core::{
    estimate_entry, path_space_basis, variance_bound, CompletionGraph, Entry, EntryEstimate, Mask,
    Observations,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::io::{fmt_num, to_csv, MatrixFile, SigmaSpec};

pub const EXIT_INPUT: u8 = 1;
pub const EXIT_NOT_RECONSTRUCTIBLE: u8 = 2;

/// What a command prints and how it exits.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub stdout: String,
    pub stderr: Option<String>,
    pub code: u8,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Output {
            stdout,
            stderr: None,
            code: 0,
        }
    }

    fn not_reconstructible(stdout: String, entry: Entry) -> Self {
        Output {
            stdout,
            stderr: Some(format!(
                "entry ({}, {}) is not reconstructible",
                entry.0, entry.1
            )),
            code: EXIT_NOT_RECONSTRUCTIBLE,
        }
    }
}

fn check_entry(mask: &Mask, (i, j): Entry) -> Result<()> {
    if i >= mask.rows() || j >= mask.cols() {
        bail!(
            "entry ({i}, {j}) is out of range for a {}x{} matrix",
            mask.rows(),
            mask.cols()
        );
    }
    Ok(())
}

fn observations(matrix: &MatrixFile) -> Result<Observations> {
    Ok(Observations::new(
        matrix.rows,
        matrix.cols,
        matrix.cells.clone(),
    )?)
}

fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(fmt_num(v))
    }
}

pub fn estimate_json(est: &EntryEstimate) -> Value {
    json!({
        "entry": [est.entry.0, est.entry.1],
        "reconstructible": est.reconstructible,
        "value": est.value,
        "log_variance": num(est.log_variance),
        "conf_low": est.conf_low,
        "conf_high": est.conf_high,
        "basis_size": est.basis_size,
        "degenerate": est.degenerate,
        "sign_conflict": est.sign_conflict,
    })
}

pub fn estimate(matrix: &MatrixFile, entry: Entry, sigma: &SigmaSpec) -> Result<Output> {
    let mask = matrix.mask()?;
    check_entry(&mask, entry)?;
    let noise = sigma.resolve(&mask)?;
    let graph = CompletionGraph::build(&mask);
    let est = estimate_entry(&graph, &observations(matrix)?, entry, &noise)?;
    let text = serde_json::to_string_pretty(&estimate_json(&est))? + "\n";
    Ok(if est.reconstructible {
        Output::ok(text)
    } else {
        Output::not_reconstructible(text, entry)
    })
}

/// Predicted log-variance of every cell, row-major; `inf` where not reconstructible.
pub fn variance_map(mask: &Mask, sigma: &SigmaSpec) -> Result<Vec<f64>> {
    let noise = sigma.resolve(mask)?;
    let graph = CompletionGraph::build(mask);
    let cols = mask.cols();
    (0..mask.rows() * cols)
        .into_par_iter()
        .map(|k| Ok(variance_bound(&graph, (k / cols, k % cols), &noise)?))
        .collect()
}

pub fn variance_map_csv(mask: &Mask, sigma: &SigmaSpec) -> Result<String> {
    let map = variance_map(mask, sigma)?;
    let cols = mask.cols();
    Ok(to_csv(mask.rows(), cols, |i, j| fmt_num(map[i * cols + j])))
}

/// Completed values and their predicted log-variances, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<Option<f64>>,
    pub variances: Vec<f64>,
}

impl Completion {
    pub fn values_csv(&self) -> String {
        to_csv(self.rows, self.cols, |i, j| {
            self.values[i * self.cols + j].map_or_else(|| "NA".to_string(), fmt_num)
        })
    }

    pub fn variances_csv(&self) -> String {
        to_csv(self.rows, self.cols, |i, j| {
            fmt_num(self.variances[i * self.cols + j])
        })
    }
}

/// Fills every reconstructible cell. With `missing_only`, observed cells keep
/// their input value and a variance of `sigma_e`; otherwise they are denoised.
pub fn complete(matrix: &MatrixFile, sigma: &SigmaSpec, missing_only: bool) -> Result<Completion> {
    let mask = matrix.mask()?;
    let noise = sigma.resolve(&mask)?;
    let graph = CompletionGraph::build(&mask);
    let obs = observations(matrix)?;
    let cols = matrix.cols;
    let cells: Vec<(Option<f64>, f64)> = (0..matrix.rows * cols)
        .into_par_iter()
        .map(|k| {
            let entry = (k / cols, k % cols);
            if missing_only {
                if let Some(v) = matrix.cells[k] {
                    return Ok((Some(v), noise.sigma(entry)?));
                }
            }
            let est = estimate_entry(&graph, &obs, entry, &noise)?;
            Ok((est.value, est.log_variance))
        })
        .collect::<Result<_>>()?;
    let (values, variances) = cells.into_iter().unzip();
    Ok(Completion {
        rows: matrix.rows,
        cols,
        values,
        variances,
    })
}

pub fn paths(mask: &Mask, entry: Entry) -> Result<Output> {
    check_entry(mask, entry)?;
    let graph = CompletionGraph::build(mask);
    let basis = path_space_basis(&graph, entry)?;
    let chains: Vec<Value> = basis
        .chains
        .iter()
        .map(|c| {
            Value::Array(
                c.terms()
                    .iter()
                    .map(|&((i, j), coeff)| json!({ "edge": [i, j], "coeff": coeff }))
                    .collect(),
            )
        })
        .collect();
    let doc = json!({
        "entry": [entry.0, entry.1],
        "basis_size": basis.len(),
        "chains": chains,
    });
    let text = serde_json::to_string_pretty(&doc)? + "\n";
    Ok(if basis.is_empty() {
        Output::not_reconstructible(text, entry)
    } else {
        Output::ok(text)
    })
}

fn records_csv(report: &TrialReport) -> String {
    let mut out = String::from("mask,level,row,col,truth,predicted_variance");
    for m in Method::ALL {
        let n = m.name();
        out.push_str(&format!(",{n}_estimate,{n}_mean_error,{n}_mean_sq_error"));
    }
    out.push('\n');
    for r in &report.records {
        out.push_str(&format!(
            "{},{},{},{},{},{}",
            r.mask,
            fmt_num(r.level),
            r.entry.0,
            r.entry.1,
            fmt_num(r.truth),
            fmt_num(r.predicted_variance)
        ));
        for o in &r.outcomes {
            out.push_str(&format!(
                ",{},{},{}",
                fmt_num(o.estimate),
                fmt_num(o.mean_error),
                fmt_num(o.mean_sq_error)
            ));
        }
        out.push('\n');
    }
    out
}

fn mse_csv(report: &TrialReport) -> String {
    let mut out = String::from("level,method,entries,mse,std_error\n");
    for s in &report.mse {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_num(s.level),
            s.method.name(),
            s.entries,
            fmt_num(s.mse),
            fmt_num(s.std_error)
        ));
    }
    out
}

/// Runs the sweep and writes `records.csv`, `mse.csv`, `bins.csv` and `summary.json` into `out`.
pub fn simulate(config: &SweepConfig, bins: usize, out: &Path) -> Result<Output> {
    let report = noise_sweep(config)?;
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;

    let mut bins_csv = String::from(
        "method,bin,count,min_predicted,mean_predicted,mean_error,mean_abs_error,mean_sq_error\n",
    );
    let mut trends = serde_json::Map::new();
    for m in Method::ALL {
        let table = bin_error_vs_variance(&report, m, bins)?;
        for b in &table {
            bins_csv.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                m.name(),
                b.index,
                b.count,
                fmt_num(b.min_predicted),
                fmt_num(b.mean_predicted),
                fmt_num(b.mean_error),
                fmt_num(b.mean_abs_error),
                fmt_num(b.mean_sq_error)
            ));
        }
        let idx: Vec<f64> = (0..table.len()).map(|k| k as f64).collect();
        let sq: Vec<f64> = table.iter().map(|b| b.mean_sq_error).collect();
        trends.insert(m.name().to_string(), num(spearman(&idx, &sq)));
    }

    let mse: Vec<Value> = report
        .mse
        .iter()
        .map(|s| {
            json!({
                "level": s.level,
                "method": s.method.name(),
                "entries": s.entries,
                "mse": num(s.mse),
                "std_error": num(s.std_error),
            })
        })
        .collect();
    let summary = json!({
        "config": config,
        "bins": bins,
        "completed_entries": report.records.len(),
        "low_confidence": report.low_confidence,
        "mse": mse,
        "bin_trend_spearman": trends,
    });

    let write = |name: &str, text: String| -> Result<()> {
        let path = out.join(name);
        fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
    };
    write("records.csv", records_csv(&report))?;
    write("mse.csv", mse_csv(&report))?;
    write("bins.csv", bins_csv)?;
    write(
        "summary.json",
        serde_json::to_string_pretty(&summary)? + "\n",
    )?;

    let mut stdout = format!(
        "{} completed entries over {} masks and {} levels; wrote {}\n",
        report.records.len(),
        config.masks,
        config.levels.len(),
        out.display()
    );
    if report.low_confidence {
        stdout.push_str("warning: few trials per level; statistics are low-confidence\n");
    }
    Ok(Output::ok(stdout))
}
