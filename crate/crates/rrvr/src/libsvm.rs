//! LIBSVM text format: `<label> <index>:<value> ...` with 1-based, strictly increasing
//! indices. Omitted indices are zero; the dimension is the largest index in the file.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rrvr_core::{Dataset, Sample};

use crate::error::{Error, Result};

struct Row {
    line: usize,
    label: f64,
    entries: Vec<(usize, f64)>,
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_row(line: usize, text: &str) -> Result<Row> {
    let mut tokens = text.split_whitespace();
    let label_tok = tokens.next().ok_or_else(|| parse_error(line, "missing label"))?;
    let label: f64 = label_tok
        .parse()
        .map_err(|_| parse_error(line, format!("bad label {label_tok:?}")))?;
    let mut entries = Vec::new();
    let mut last = 0;
    for tok in tokens {
        let (idx, val) = tok
            .split_once(':')
            .ok_or_else(|| parse_error(line, format!("expected index:value, got {tok:?}")))?;
        let idx: usize = idx.parse().map_err(|_| parse_error(line, format!("bad index {idx:?}")))?;
        let val: f64 = val.parse().map_err(|_| parse_error(line, format!("bad value {val:?}")))?;
        if idx == 0 {
            return Err(parse_error(line, "indices are 1-based"));
        }
        if idx <= last {
            return Err(parse_error(line, format!("index {idx} out of order after {last}")));
        }
        if !val.is_finite() {
            return Err(parse_error(line, format!("non-finite value at index {idx}")));
        }
        last = idx;
        entries.push((idx, val));
    }
    Ok(Row { line, label, entries })
}

/// Reads a dataset. Labels are kept as ±1 unless every label is 0 or 1, in which case
/// 0 maps to −1. LF and CRLF line endings are accepted; blank lines are skipped.
pub fn parse_libsvm<R: BufRead>(reader: R) -> Result<Dataset> {
    let mut rows = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        rows.push(parse_row(k + 1, text)?);
    }
    if rows.is_empty() {
        return Err(Error::Core(rrvr_core::Error::InvalidInput("no samples".into())));
    }
    let dim = rows.iter().filter_map(|r| r.entries.last().map(|e| e.0)).max().unwrap_or(0);
    if dim == 0 {
        return Err(parse_error(rows[0].line, "no feature indices in file"));
    }
    let zero_one = rows.iter().all(|r| r.label == 0.0 || r.label == 1.0);
    let samples = rows
        .into_iter()
        .map(|r| {
            let label = match (zero_one, r.label) {
                (true, 0.0) => -1,
                (_, 1.0) => 1,
                (false, -1.0) => -1,
                (_, l) => return Err(parse_error(r.line, format!("label {l} is not ±1 (or 0/1 throughout)"))),
            };
            let mut features = vec![0.0; dim];
            for (idx, val) in r.entries {
                features[idx - 1] = val;
            }
            Ok(Sample::new(features, label)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset::new(samples)?)
}

pub fn parse_libsvm_str(text: &str) -> Result<Dataset> {
    parse_libsvm(text.as_bytes())
}

pub fn read_libsvm(path: &Path) -> Result<Dataset> {
    parse_libsvm(BufReader::new(File::open(path)?))
}

/// Writes `+1`/`-1` labels and the nonzero features in shortest round-trip form.
pub fn write_libsvm<W: Write>(dataset: &Dataset, mut out: W) -> Result<()> {
    for s in dataset.samples() {
        write!(out, "{}", if s.label() > 0 { "+1" } else { "-1" })?;
        for (k, v) in s.features().iter().enumerate() {
            if *v != 0.0 {
                write!(out, " {}:{:?}", k + 1, v)?;
            }
        }
        writeln!(out)?;
    }
    Ok(())
}
