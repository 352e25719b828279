//! Tab-separated output files with a commented provenance header.
//!
//! Bin dumps: `# key<TAB>value` lines, a column-name row, then one row per
//! bin. Summaries and entanglement tables follow the same shape.

use crate::estimators::{Accumulator, EstimateWithError};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("i/o on {path}: {err}")]
    Io { path: String, err: std::io::Error },
    #[error("parse error in {path}: {msg}")]
    Parse { path: String, msg: String },
}

fn io_err(path: &Path, err: std::io::Error) -> FileError {
    FileError::Io {
        path: path.display().to_string(),
        err,
    }
}

fn parse_err(path: &Path, msg: impl Into<String>) -> FileError {
    FileError::Parse {
        path: path.display().to_string(),
        msg: msg.into(),
    }
}

pub fn write_atomic(path: &Path, contents: &str) -> Result<(), FileError> {
    let tmp = path.with_extension("tmp");
    let mut f = std::fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
    f.write_all(contents.as_bytes()).map_err(|e| io_err(&tmp, e))?;
    f.sync_all().map_err(|e| io_err(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| io_err(path, e))?;
    Ok(())
}

/// Raw bin dump: one row per bin, columns = observables.
pub fn write_bins(
    path: &Path,
    header: &[(String, String)],
    acc: &Accumulator,
) -> Result<(), FileError> {
    let mut s = String::new();
    for (k, v) in header {
        writeln!(s, "# {k}\t{v}").unwrap();
    }
    writeln!(s, "# bin_size\t{}", acc.bin_size).unwrap();
    writeln!(s, "bin\t{}", acc.names.join("\t")).unwrap();
    for b in 0..acc.n_bins() {
        write!(s, "{b}").unwrap();
        for col in &acc.bins {
            write!(s, "\t{:.17e}", col[b]).unwrap();
        }
        writeln!(s).unwrap();
    }
    write_atomic(path, &s)
}

/// Parsed bin dump: provenance map plus the reconstructed accumulator.
pub fn read_bins(path: &Path) -> Result<(BTreeMap<String, String>, Accumulator), FileError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut header = BTreeMap::new();
    let mut names: Option<Vec<String>> = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("# ") {
            let (k, v) = rest
                .split_once('\t')
                .ok_or_else(|| parse_err(path, format!("line {}: bad header", lineno + 1)))?;
            header.insert(k.to_string(), v.to_string());
            continue;
        }
        let mut fields = line.split('\t');
        let first = fields.next().unwrap_or("");
        if names.is_none() {
            if first != "bin" {
                return Err(parse_err(path, format!("line {}: expected column row", lineno + 1)));
            }
            names = Some(fields.map(|f| f.to_string()).collect());
            continue;
        }
        let row: Result<Vec<f64>, _> = fields.map(|f| f.parse::<f64>()).collect();
        rows.push(row.map_err(|e| parse_err(path, format!("line {}: {e}", lineno + 1)))?);
    }
    let names = names.ok_or_else(|| parse_err(path, "missing column row"))?;
    let bin_size: u64 = header
        .get("bin_size")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| parse_err(path, "missing bin_size"))?;
    let mut bins = vec![Vec::with_capacity(rows.len()); names.len()];
    for (rno, row) in rows.iter().enumerate() {
        if row.len() != names.len() {
            return Err(parse_err(path, format!("row {rno}: {} fields, expected {}", row.len(), names.len())));
        }
        for (c, v) in row.iter().enumerate() {
            bins[c].push(*v);
        }
    }
    let cols = names.len();
    let acc = Accumulator::from_raw_parts(names, bin_size, bins, vec![0.0; cols], 0);
    Ok((header, acc))
}

/// Merged summary: one row per observable with jackknife error.
pub fn write_summary(
    path: &Path,
    header: &[(String, String)],
    rows: &[(String, EstimateWithError)],
) -> Result<(), FileError> {
    let mut s = String::new();
    for (k, v) in header {
        writeln!(s, "# {k}\t{v}").unwrap();
    }
    writeln!(s, "observable\tvalue\tsigma\tnbins").unwrap();
    for (name, e) in rows {
        writeln!(s, "{name}\t{:.17e}\t{:.17e}\t{}", e.value, e.sigma, e.nbins).unwrap();
    }
    write_atomic(path, &s)
}

pub fn read_summary(
    path: &Path,
) -> Result<(BTreeMap<String, String>, Vec<(String, EstimateWithError)>), FileError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut header = BTreeMap::new();
    let mut rows = Vec::new();
    for line in text.lines() {
        if line.is_empty() || line.starts_with("observable\t") {
            continue;
        }
        if let Some(rest) = line.strip_prefix("# ") {
            if let Some((k, v)) = rest.split_once('\t') {
                header.insert(k.to_string(), v.to_string());
            }
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 4 {
            return Err(parse_err(path, format!("bad summary row: {line}")));
        }
        let value = f[1].parse().map_err(|e| parse_err(path, format!("{e}")))?;
        let sigma = f[2].parse().map_err(|e| parse_err(path, format!("{e}")))?;
        let nbins = f[3].parse().map_err(|e| parse_err(path, format!("{e}")))?;
        rows.push((f[0].to_string(), EstimateWithError { value, sigma, nbins }));
    }
    Ok((header, rows))
}

/// Generic table with provenance header for figure-ready output.
pub fn write_table(
    path: &Path,
    header: &[(String, String)],
    columns: &[&str],
    rows: &[Vec<String>],
) -> Result<(), FileError> {
    let mut s = String::new();
    for (k, v) in header {
        writeln!(s, "# {k}\t{v}").unwrap();
    }
    writeln!(s, "{}", columns.join("\t")).unwrap();
    for row in rows {
        writeln!(s, "{}", row.join("\t")).unwrap();
    }
    write_atomic(path, &s)
}
