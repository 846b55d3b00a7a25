use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Reads `node_index,class_index` lines into a dense class sequence.
///
/// Every node `0..n` must appear exactly once and the classes used must be
/// exactly `0..c`. Line order does not matter; a header line is skipped.
pub fn load_labels(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let path = path.as_ref();
    let text = fs::read(path)?;
    parse_labels(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_labels(bytes: &[u8]) -> Result<Vec<usize>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut pairs: Vec<(usize, usize, u64)> = Vec::new();
    let mut first = true;
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(format!("CSV error: {e}")))?;
        let line = record.position().map_or(idx as u64 + 1, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let is_first = std::mem::replace(&mut first, false);
        if is_first && record.get(0).is_some_and(|f| f.parse::<usize>().is_err()) {
            continue;
        }
        if record.len() != 2 {
            return Err(Error::Parse(format!(
                "line {line}: expected node_index,class_index"
            )));
        }
        let field = |k: usize| -> Result<usize> {
            record[k].parse().map_err(|_| {
                Error::Parse(format!("line {line}: {:?} is not a non-negative integer", &record[k]))
            })
        };
        pairs.push((field(0)?, field(1)?, line));
    }
    if pairs.is_empty() {
        return Err(Error::Parse("label file is empty".into()));
    }
    let n = pairs.iter().map(|p| p.0).max().unwrap() + 1;
    let mut labels: Vec<Option<usize>> = vec![None; n];
    for &(node, class, line) in &pairs {
        if labels[node].replace(class).is_some() {
            return Err(Error::Parse(format!("line {line}: duplicate label for node {node}")));
        }
    }
    if let Some(missing) = labels.iter().position(Option::is_none) {
        return Err(Error::Parse(format!("node {missing} has no label (gap in coverage)")));
    }
    let labels: Vec<usize> = labels.into_iter().map(Option::unwrap).collect();
    let classes = labels.iter().max().unwrap() + 1;
    let mut seen = vec![false; classes];
    for &c in &labels {
        seen[c] = true;
    }
    if let Some(gap) = seen.iter().position(|s| !s) {
        return Err(Error::Parse(format!(
            "class indices are not contiguous: class {gap} is unused but {} appears",
            classes - 1
        )));
    }
    Ok(labels)
}

pub fn write_labels(path: impl AsRef<Path>, labels: &[usize]) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    for (i, c) in labels.iter().enumerate() {
        writeln!(out, "{i},{c}")?;
    }
    out.flush()?;
    Ok(())
}
