use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::eval::{MetricsReport, SweepReport};

/// Centrality and Gaussian degrees evaluated on the same folds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub centrality: MetricsReport,
    pub grande: MetricsReport,
    /// `grande.mean - centrality.mean`.
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Results {
    Experiment(MetricsReport),
    Sweep(SweepReport),
    Comparison(ComparisonReport),
}

/// Description of the inputs a result was computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataEcho {
    pub features: String,
    pub labels: String,
    pub nodes: usize,
    pub dims: usize,
    pub classes: usize,
    pub k: usize,
    pub edges: usize,
}

/// Wall-clock timings in seconds. Not reproducible between runs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub graph_seconds: f64,
    pub run_seconds: f64,
    pub total_seconds: f64,
}

/// Top-level result file. Everything except `timings` is a deterministic
/// function of the inputs and the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub command: String,
    pub data: DataEcho,
    pub results: Results,
    pub timings: Timings,
}

impl ResultDocument {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// The document without its `timings` member, as compact JSON.
    pub fn deterministic_json(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        if let Some(obj) = v.as_object_mut() {
            obj.remove("timings");
        }
        Ok(serde_json::to_string(&v)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}
