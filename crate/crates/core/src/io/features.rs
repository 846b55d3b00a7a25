//! Feature matrix files.
//!
//! Two formats are read, chosen by content:
//!
//! * binary: the 8 bytes `GRNDFEAT`, then `n` and `d` as little-endian
//!   `u64`, then `n * d` little-endian `f64` values in row-major order;
//! * CSV: `n` lines of `d` comma-separated numbers, with an optional header
//!   line recognized by a non-numeric first field.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::DenseMatrix;

pub const FEATURE_MAGIC: &[u8; 8] = b"GRNDFEAT";
const HEADER_LEN: usize = 24;

fn parse_err<T>(msg: String) -> Result<T> {
    Err(Error::Parse(msg))
}

pub fn load_features(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    let m = parse_features(&bytes).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    Ok(m)
}

/// Parses either feature format from raw bytes.
pub fn parse_features(bytes: &[u8]) -> Result<DenseMatrix> {
    let m = if bytes.starts_with(FEATURE_MAGIC) {
        parse_binary(bytes)?
    } else if bytes[..bytes.len().min(HEADER_LEN)].contains(&0) || std::str::from_utf8(bytes).is_err() {
        return parse_err(format!(
            "bad magic at byte 0: expected {:?} or CSV text",
            String::from_utf8_lossy(FEATURE_MAGIC)
        ));
    } else {
        parse_csv(bytes)?
    };
    if m.rows() < 2 {
        return parse_err(format!("feature matrix has {} rows; at least 2 are required", m.rows()));
    }
    if m.cols() == 0 {
        return parse_err("feature matrix has no columns".into());
    }
    Ok(m)
}

fn parse_binary(bytes: &[u8]) -> Result<DenseMatrix> {
    if bytes.len() < HEADER_LEN {
        return parse_err(format!(
            "truncated header: {} bytes, expected {HEADER_LEN}",
            bytes.len()
        ));
    }
    let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let d = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
    let expected = n
        .checked_mul(d)
        .and_then(|v| v.checked_mul(8))
        .and_then(|v| v.checked_add(HEADER_LEN as u64))
        .ok_or_else(|| Error::Parse(format!("header sizes n={n} d={d} overflow")))?;
    if (bytes.len() as u64) < expected {
        return parse_err(format!(
            "truncated payload: file ends at byte {}, expected {expected} bytes for n={n} d={d}",
            bytes.len()
        ));
    }
    if (bytes.len() as u64) > expected {
        return parse_err(format!("unexpected trailing data after byte {expected}"));
    }
    let (n, d) = (n as usize, d as usize);
    let mut data = Vec::with_capacity(n * d);
    for (k, chunk) in bytes[HEADER_LEN..].chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return parse_err(format!("non-finite value at byte {}", HEADER_LEN + 8 * k));
        }
        data.push(v);
    }
    DenseMatrix::from_vec(n, d, data)
}

fn parse_csv(bytes: &[u8]) -> Result<DenseMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut data = Vec::new();
    let mut cols: Option<usize> = None;
    let mut rows = 0;
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(format!("CSV error: {e}")))?;
        let line = record.position().map_or(idx as u64 + 1, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        if rows == 0 && cols.is_none() && record.get(0).is_some_and(|f| f.parse::<f64>().is_err()) {
            continue; // header
        }
        match cols {
            None => cols = Some(record.len()),
            Some(c) if c != record.len() => {
                return parse_err(format!(
                    "line {line}: {} fields, expected {c}",
                    record.len()
                ));
            }
            _ => {}
        }
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                Error::Parse(format!("line {line}, column {}: non-numeric field {field:?}", j + 1))
            })?;
            if !v.is_finite() {
                return parse_err(format!("line {line}, column {}: non-finite value", j + 1));
            }
            data.push(v);
        }
        rows += 1;
    }
    DenseMatrix::from_vec(rows, cols.unwrap_or(0), data)
}

pub fn write_features_binary(path: impl AsRef<Path>, x: &DenseMatrix) -> Result<()> {
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * x.as_slice().len());
    buf.extend_from_slice(FEATURE_MAGIC);
    buf.extend_from_slice(&(x.rows() as u64).to_le_bytes());
    buf.extend_from_slice(&(x.cols() as u64).to_le_bytes());
    for v in x.as_slice() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, buf)?;
    Ok(())
}

/// Headerless CSV; values use the shortest round-tripping decimal form.
pub fn write_features_csv(path: impl AsRef<Path>, x: &DenseMatrix) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    for i in 0..x.rows() {
        let line: Vec<String> = x.row(i).iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()?;
    Ok(())
}
