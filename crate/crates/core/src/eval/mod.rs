//! Fold-based transductive evaluation and sigma sweeps.
//!
//! The graph is built once from all features and shared by every fold;
//! only labels are hidden. Each fold in turn is the training set and the
//! remaining folds are the test set.

mod folds;
mod synthetic;

pub use folds::{make_folds, FoldPlan};
pub use synthetic::generate_blobs;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, dim_err, Result};
use crate::graph::NeighborGraph;
use crate::models::{predict, train, DegreeStrategy, ModelSpec, TrainConfig};
use crate::tensor::{AdamConfig, DenseMatrix};
use folds::{derive_seed, DROPOUT_STREAM, EXECUTION_STREAM, FOLD_STREAM, INIT_STREAM};

/// Everything that determines one evaluation run besides the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub degree: DegreeStrategy,
    pub epochs: usize,
    pub adam: AdamConfig,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: ModelSpec::sgc_default(),
            degree: DegreeStrategy::Centrality,
            epochs: 200,
            adam: AdamConfig::default(),
            seed: 0,
        }
    }
}

/// Fraction of `mask` nodes whose prediction matches the truth.
pub fn accuracy(pred: &[usize], truth: &[usize], mask: &[usize]) -> Result<f64> {
    if mask.is_empty() {
        return arg_err("accuracy mask is empty");
    }
    if pred.len() != truth.len() {
        return dim_err("prediction and truth lengths differ");
    }
    let mut hits = 0usize;
    for &i in mask {
        if i >= pred.len() {
            return arg_err(format!("mask index {i} out of range"));
        }
        hits += usize::from(pred[i] == truth[i]);
    }
    Ok(hits as f64 / mask.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub execution: usize,
    pub fold: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub config: ExperimentConfig,
    pub executions: usize,
    pub fold_count: usize,
    /// Seed of each execution's [`FoldPlan`]; with `n` and `fold_count` it
    /// determines the folds.
    pub fold_seeds: Vec<u64>,
    pub cells: Vec<CellResult>,
    pub mean: f64,
    /// Population standard deviation over all cells.
    pub std: f64,
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl MetricsReport {
    fn from_cells(
        config: ExperimentConfig,
        executions: usize,
        fold_count: usize,
        fold_seeds: Vec<u64>,
        cells: Vec<CellResult>,
    ) -> Self {
        let acc: Vec<f64> = cells.iter().map(|c| c.accuracy).collect();
        let (mean, std) = mean_std(&acc);
        Self {
            config,
            executions,
            fold_count,
            fold_seeds,
            cells,
            mean,
            std,
        }
    }
}

/// Fold plan of execution `execution` under top-level `seed`.
pub fn execution_folds(n: usize, fold_count: usize, seed: u64, execution: usize) -> Result<FoldPlan> {
    let exec_seed = derive_seed(seed, EXECUTION_STREAM, execution as u64);
    make_folds(n, fold_count, derive_seed(exec_seed, FOLD_STREAM, 0))
}

/// Repeats the fold protocol `executions` times and aggregates accuracy.
///
/// For execution `e` and fold `f` the model is trained on the labels of fold
/// `f` only and tested on every other node. Initialization and dropout seeds
/// depend on `(cfg.seed, e, f)` alone, so runs that differ only in the
/// degree strategy share folds and initial weights.
pub fn run_experiment(
    x: &DenseMatrix,
    labels: &[usize],
    graph: &NeighborGraph,
    cfg: &ExperimentConfig,
    executions: usize,
    fold_count: usize,
) -> Result<MetricsReport> {
    if executions == 0 {
        return arg_err("need at least one execution");
    }
    let n = x.rows();
    if labels.len() != n || graph.n() != n {
        return dim_err(format!(
            "features have {n} rows, labels {}, graph {} nodes",
            labels.len(),
            graph.n()
        ));
    }
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let plans = (0..executions)
        .map(|e| execution_folds(n, fold_count, cfg.seed, e))
        .collect::<Result<Vec<_>>>()?;

    let jobs: Vec<(usize, usize)> = (0..executions)
        .flat_map(|e| (0..fold_count).map(move |f| (e, f)))
        .collect();
    let cells = jobs
        .par_iter()
        .map(|&(e, f)| {
            let exec_seed = derive_seed(cfg.seed, EXECUTION_STREAM, e as u64);
            let plan = &plans[e];
            let train_mask = plan.members(f);
            let test_mask = plan.complement(f);
            let mut init_rng = ChaCha8Rng::seed_from_u64(derive_seed(exec_seed, INIT_STREAM, f as u64));
            let mut model = cfg.model.build(x.cols(), classes, &mut init_rng)?;
            let tcfg = TrainConfig {
                epochs: cfg.epochs,
                adam: cfg.adam,
                degree: cfg.degree.clone(),
                seed: derive_seed(exec_seed, DROPOUT_STREAM, f as u64),
            };
            let outcome = train(&mut model, x, graph, labels, &train_mask, &tcfg)?;
            let pred = predict(&model, x, &outcome.a_hat)?;
            Ok(CellResult {
                execution: e,
                fold: f,
                accuracy: accuracy(&pred, labels, &test_mask)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let fold_seeds = plans.iter().map(|p| p.seed).collect();
    Ok(MetricsReport::from_cells(cfg.clone(), executions, fold_count, fold_seeds, cells))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaResult {
    pub sigma: f64,
    pub report: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub results: Vec<SigmaResult>,
    pub best_sigma: f64,
    pub best_mean: f64,
}

/// Index of the highest mean; ties go to the smaller sigma.
pub fn select_best(results: &[(f64, f64)]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &(sigma, mean)) in results.iter().enumerate() {
        best = match best {
            None => Some(i),
            Some(b) => {
                let (bs, bm) = results[b];
                if mean > bm || (mean == bm && sigma < bs) {
                    Some(i)
                } else {
                    Some(b)
                }
            }
        };
    }
    best
}

/// One [`run_experiment`] per sigma with the Gaussian degree; folds and
/// seeds are shared across sigmas.
pub fn sigma_sweep(
    x: &DenseMatrix,
    labels: &[usize],
    graph: &NeighborGraph,
    cfg: &ExperimentConfig,
    sigmas: &[f64],
    executions: usize,
    fold_count: usize,
) -> Result<SweepReport> {
    if !matches!(cfg.degree, DegreeStrategy::Grande { .. }) {
        return arg_err("sigma sweep requires the Gaussian neighborhood degree");
    }
    if sigmas.is_empty() {
        return arg_err("sigma grid is empty");
    }
    let mut results = Vec::with_capacity(sigmas.len());
    for &sigma in sigmas {
        let mut c = cfg.clone();
        c.degree = DegreeStrategy::Grande { sigma };
        let report = run_experiment(x, labels, graph, &c, executions, fold_count)?;
        results.push(SigmaResult { sigma, report });
    }
    let pairs: Vec<(f64, f64)> = results.iter().map(|r| (r.sigma, r.report.mean)).collect();
    let b = select_best(&pairs).expect("non-empty grid");
    Ok(SweepReport {
        best_sigma: pairs[b].0,
        best_mean: pairs[b].1,
        results,
    })
}

/// `lo, lo+step, ..., hi` (inclusive within half a step), rounded to 1e-9
/// so that decimal grids print cleanly.
pub fn sigma_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && step > 0.0) || !(lo.is_finite() && hi.is_finite()) {
        return arg_err(format!("invalid sigma grid {lo}:{hi}:{step}"));
    }
    let count = ((hi - lo) / step + 0.5).floor() as usize + 1;
    Ok((0..count)
        .map(|i| ((lo + i as f64 * step) * 1e9).round() / 1e9)
        .collect())
}
