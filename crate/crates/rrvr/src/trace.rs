//! CSV convergence traces.
//!
//! A trace file starts with `# key: value` metadata lines, followed by the column row
//! `epoch,rel_mse,excess_risk,grad_evals,a_sq,b_sq,energy` and one row per epoch.
//! Floats are written in shortest round-trip form; absent diagnostics are empty fields.

use std::io::{Read, Write};

use rrvr_core::solvers::EpochTrace;

use crate::error::{Error, Result};

pub const COLUMNS: [&str; 7] = ["epoch", "rel_mse", "excess_risk", "grad_evals", "a_sq", "b_sq", "energy"];

/// Ordered `key: value` header entries.
pub type Metadata = Vec<(String, String)>;

fn float(x: f64) -> String {
    format!("{x:?}")
}

fn opt_float(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

pub fn write_trace<W: Write>(mut out: W, meta: &[(String, String)], rows: &[EpochTrace]) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::Trace("no rows to write".into()));
    }
    for (key, value) in meta {
        if key.contains([':', '\n', '\r']) || value.contains(['\n', '\r']) {
            return Err(Error::Trace(format!("metadata entry {key:?} cannot be written on one line")));
        }
        writeln!(out, "# {key}: {value}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for r in rows {
        w.write_record([
            r.epoch.to_string(),
            float(r.rel_mse),
            float(r.excess_risk),
            r.grad_evals.to_string(),
            opt_float(r.a_sq),
            opt_float(r.b_sq),
            opt_float(r.energy),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn parse_field<T: std::str::FromStr>(record: &csv::StringRecord, k: usize) -> Result<T> {
    let text = record.get(k).unwrap_or("");
    text.parse()
        .map_err(|_| Error::Trace(format!("bad {} value {text:?} on epoch row {:?}", COLUMNS[k], record.get(0))))
}

fn parse_opt(record: &csv::StringRecord, k: usize) -> Result<Option<f64>> {
    match record.get(k) {
        None | Some("") => Ok(None),
        Some(_) => parse_field(record, k).map(Some),
    }
}

/// Inverse of [`write_trace`].
pub fn read_trace<R: Read>(mut input: R) -> Result<(Metadata, Vec<EpochTrace>)> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let mut meta = Vec::new();
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        let entry = line.trim_start_matches('#').trim_start();
        let (key, value) = entry
            .split_once(": ")
            .or_else(|| entry.strip_suffix(':').map(|k| (k, "")))
            .ok_or_else(|| Error::Trace(format!("malformed metadata line {line:?}")))?;
        meta.push((key.to_string(), value.to_string()));
    }
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    if reader.headers()?.iter().ne(COLUMNS) {
        return Err(Error::Trace("unexpected column row".into()));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        rows.push(EpochTrace {
            epoch: parse_field(&record, 0)?,
            rel_mse: parse_field(&record, 1)?,
            excess_risk: parse_field(&record, 2)?,
            grad_evals: parse_field(&record, 3)?,
            a_sq: parse_opt(&record, 4)?,
            b_sq: parse_opt(&record, 5)?,
            energy: parse_opt(&record, 6)?,
        });
    }
    Ok((meta, rows))
}
