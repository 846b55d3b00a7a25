//! File formats: features, labels, edge lists and result documents.

mod features;
mod labels;
mod report;

pub use features::{
    load_features, parse_features, write_features_binary, write_features_csv, FEATURE_MAGIC,
};
pub use labels::{load_labels, parse_labels, write_labels};
pub use report::{ComparisonReport, DataEcho, ResultDocument, Results, Timings};

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::NeighborGraph;

/// One `i j` line per edge, `i < j`, sorted.
pub fn write_edge_list(path: impl AsRef<Path>, g: &NeighborGraph) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    for &(i, j) in g.edges() {
        writeln!(out, "{i} {j}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Vec<(usize, usize)>> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| {
            let mut it = l.split_whitespace().map(str::parse::<usize>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(i)), Some(Ok(j)), None) => Ok((i, j)),
                _ => Err(Error::Parse(format!("line {}: expected \"i j\"", k + 1))),
            }
        })
        .collect()
}
