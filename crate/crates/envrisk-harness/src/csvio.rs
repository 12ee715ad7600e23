//! Flat-file emission. CSV layout is the contract consumed by plotting
//! tools, so column order is fixed and floats are printed with Rust's
//! shortest-round-trip formatting: identical inputs give identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use envrisk::fitters::RegPath;
use envrisk::synthdata::Dataset;

use crate::error::{HarnessError, Result};
use crate::sweep::{AggRow, SweepRow};

/// Raw sweep rows: `trial,path_index,reg_value,train_loss,test_loss,bound_value,norm_l1,norm_l2`.
pub fn sweep_rows_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("trial,path_index,reg_value,train_loss,test_loss,bound_value,norm_l1,norm_l2\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.trial,
            r.path_index,
            r.reg_value,
            r.train_loss,
            r.test_loss,
            r.bound_value,
            r.norm_l1,
            r.norm_l2
        );
    }
    out
}

/// Aggregate rows: `path_index,reg_value,mean_test,ci_lo,ci_hi,mean_bound`.
pub fn agg_rows_csv(rows: &[AggRow]) -> String {
    let mut out = String::from("path_index,reg_value,mean_test,ci_lo,ci_hi,mean_bound\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.path_index, r.reg_value, r.mean_test, r.ci_lo, r.ci_hi, r.mean_bound
        );
    }
    out
}

/// Dataset export with header `x_1,...,x_d,y`.
pub fn dataset_csv(ds: &Dataset) -> String {
    let (n, d) = (ds.x.nrows(), ds.x.ncols());
    let mut out = String::new();
    for j in 0..d {
        let _ = write!(out, "x_{},", j + 1);
    }
    out.push_str("y\n");
    for i in 0..n {
        for j in 0..d {
            let _ = write!(out, "{},", ds.x[(i, j)]);
        }
        let _ = writeln!(out, "{}", ds.y[i]);
    }
    out
}

/// Parse a dataset written by [`dataset_csv`].
pub fn parse_dataset_csv(text: &str) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| HarnessError::Csv("empty file".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.last() != Some(&"y") || cols.len() < 2 {
        return Err(HarnessError::Csv("expected header x_1,...,x_d,y".into()));
    }
    let d = cols.len() - 1;
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != d + 1 {
            return Err(HarnessError::Csv(format!(
                "row {}: expected {} fields, got {}",
                lineno + 2,
                d + 1,
                fields.len()
            )));
        }
        for f in &fields[..d] {
            xs.push(
                f.parse::<f64>()
                    .map_err(|e| HarnessError::Csv(format!("row {}: {e}", lineno + 2)))?,
            );
        }
        ys.push(
            fields[d]
                .parse::<f64>()
                .map_err(|e| HarnessError::Csv(format!("row {}: {e}", lineno + 2)))?,
        );
    }
    let n = ys.len();
    if n == 0 {
        return Err(HarnessError::Csv("no data rows".into()));
    }
    Ok((DMatrix::from_row_iterator(n, d, xs), DVector::from_vec(ys)))
}

/// Regularization-path summary: `path_index,reg_value,train_loss,norm_l1,norm_l2,intercept`,
/// optionally followed by the full coefficient vector per row.
pub fn regpath_csv(path: &RegPath, include_coefs: bool) -> String {
    let mut out = String::from("path_index,reg_value,train_loss,norm_l1,norm_l2,intercept");
    if include_coefs {
        for j in 0..path.coefficients.first().map_or(0, |w| w.len()) {
            let _ = write!(out, ",w_{}", j + 1);
        }
    }
    out.push('\n');
    for i in 0..path.len() {
        let _ = write!(
            out,
            "{},{},{},{},{},{}",
            i,
            path.reg_values[i],
            path.train_losses[i],
            path.norms_l1[i],
            path.norms_l2[i],
            path.intercepts[i]
        );
        if include_coefs {
            for v in path.coefficients[i].iter() {
                let _ = write!(out, ",{v}");
            }
        }
        out.push('\n');
    }
    out
}

/// Parse the raw sweep CSV back into rows (used to recompute aggregates).
pub fn parse_sweep_rows_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| HarnessError::Csv("empty file".into()))?;
    if header != "trial,path_index,reg_value,train_loss,test_loss,bound_value,norm_l1,norm_l2" {
        return Err(HarnessError::Csv("unexpected sweep header".into()));
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(HarnessError::Csv(format!("row {}: wrong arity", lineno + 2)));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|e| HarnessError::Csv(format!("row {}: {e}", lineno + 2)))
        };
        rows.push(SweepRow {
            trial: f[0].parse().map_err(|_| HarnessError::Csv("bad trial".into()))?,
            path_index: f[1].parse().map_err(|_| HarnessError::Csv("bad index".into()))?,
            reg_value: parse(f[2])?,
            train_loss: parse(f[3])?,
            test_loss: parse(f[4])?,
            bound_value: parse(f[5])?,
            norm_l1: parse(f[6])?,
            norm_l2: parse(f[7])?,
            converged: true,
            zero_one: None,
        });
    }
    Ok(rows)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, text)?;
    Ok(())
}
