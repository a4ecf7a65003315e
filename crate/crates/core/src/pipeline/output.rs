//! Files written by a run: coupling, metrics, distribution table, solver
//! trace and the projected dataset.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::pipeline::run::RunOutput;
use crate::projection::WeightedDataset;
use crate::solvers::SolverTrace;
use crate::transport::Coupling;

pub const COUPLING_FILE: &str = "coupling.csv";
pub const METRICS_FILE: &str = "metrics.json";
pub const DISTRIBUTIONS_FILE: &str = "distributions.csv";
pub const TRACE_FILE: &str = "trace.csv";
pub const PROJECTED_FILE: &str = "projected.csv";

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(f))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `N×M` matrix headed by the target points, each row led by its source
/// point.
pub fn write_coupling(path: &Path, coupling: &Coupling) -> Result<()> {
    let mut w = writer(path)?;
    let mut header = vec![String::new()];
    header.extend(coupling.target().points().iter().map(|p| p.to_string()));
    w.write_record(&header)?;
    for (p, row) in coupling
        .source()
        .points()
        .iter()
        .zip(coupling.entries().rows())
    {
        let mut rec = vec![p.to_string()];
        rec.extend(row.iter().map(|x| x.to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a file written by [`write_coupling`]: row labels, column labels
/// and the matrix.
pub fn read_coupling(path: &Path) -> Result<(Vec<String>, Vec<String>, Array2<f64>)> {
    let table = crate::pipeline::ingest::read_table(path)?;
    let cols: Vec<String> = table.headers.iter().skip(1).cloned().collect();
    let mut rows = Vec::with_capacity(table.records.len());
    let mut values = Vec::with_capacity(table.records.len() * cols.len());
    for (r, rec) in table.records.iter().enumerate() {
        if rec.len() != cols.len() + 1 {
            return Err(Error::LengthMismatch {
                expected: cols.len() + 1,
                actual: rec.len(),
            });
        }
        rows.push(rec[0].clone());
        for (c, cell) in rec.iter().enumerate().skip(1) {
            values.push(cell.parse::<f64>().map_err(|e| Error::ParseError {
                row: r + 1,
                column: table.headers[c].clone(),
                message: e.to_string(),
            })?);
        }
    }
    let m = Array2::from_shape_vec((rows.len(), cols.len()), values)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok((rows, cols, m))
}

pub fn write_trace(path: &Path, trace: &SolverTrace) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "iteration",
        "set",
        "row_residual",
        "col_residual",
        "band_residual",
    ])?;
    for (k, r) in trace.records.iter().enumerate() {
        let set = serde_json::to_value(r.set)?;
        w.write_record([
            (k + 1).to_string(),
            set.as_str().unwrap_or_default().to_string(),
            r.row_residual.to_string(),
            r.col_residual.to_string(),
            opt(r.band_residual),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_distributions(path: &Path, out: &RunOutput) -> Result<()> {
    let t = &out.table;
    let mut w = writer(path)?;
    w.write_record([
        "point", "p_x", "p_x_s0", "p_x_s1", "p_xt", "p_xt_s0", "p_xt_s1", "target",
    ])?;
    for (i, p) in t.support.points().iter().enumerate() {
        let g = |groups: &Option<[Vec<f64>; 2]>, k: usize| opt(groups.as_ref().map(|g| g[k][i]));
        w.write_record([
            p.to_string(),
            t.p_x[i].to_string(),
            g(&t.p_x_groups, 0),
            g(&t.p_x_groups, 1),
            t.p_xt[i].to_string(),
            g(&t.p_xt_groups, 0),
            g(&t.p_xt_groups, 1),
            opt(t.target.as_ref().map(|q| q[i])),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_projected(path: &Path, data: &WeightedDataset, adjusted: &[String]) -> Result<()> {
    let mut w = writer(path)?;
    let mut header = vec!["origin".to_string()];
    header.extend(adjusted.iter().cloned());
    header.extend(data.neutral_columns().iter().cloned());
    header.extend(["s", "y", "score", "weight"].map(String::from));
    w.write_record(&header)?;
    for r in data.rows() {
        let mut rec = vec![r.origin.to_string()];
        rec.extend(data.point(r).coords().iter().map(|x| x.to_string()));
        rec.extend(r.u.iter().cloned());
        rec.push(r.s.map(|s| s.to_string()).unwrap_or_default());
        rec.push(r.y.map(|y| y.to_string()).unwrap_or_default());
        rec.push(opt(r.score));
        rec.push(r.w.to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes every available artefact of `out` into `dir` and returns the
/// paths written.
pub fn emit_outputs(out: &RunOutput, dir: &Path, adjusted: &[String]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    if let Some(c) = &out.coupling {
        let p = dir.join(COUPLING_FILE);
        write_coupling(&p, c)?;
        written.push(p);
    }
    if let Some(r) = &out.report {
        let p = dir.join(METRICS_FILE);
        let text = serde_json::to_string_pretty(r)? + "\n";
        fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
        written.push(p);
    }
    let p = dir.join(DISTRIBUTIONS_FILE);
    write_distributions(&p, out)?;
    written.push(p);
    if let Some(t) = &out.trace {
        let p = dir.join(TRACE_FILE);
        write_trace(&p, t)?;
        written.push(p);
    }
    let p = dir.join(PROJECTED_FILE);
    write_projected(&p, &out.projected, adjusted)?;
    written.push(p);
    Ok(written)
}
