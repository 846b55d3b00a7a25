use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::degree::{degree_centrality, grande_degrees, normalize_adjacency, normalize_with};
use crate::error::{arg_err, dim_err, Error, Result};
use crate::graph::{to_propagator_with_self_loops, NeighborGraph};
use crate::models::Model;
use crate::tensor::{AdamConfig, DenseMatrix, SparsePropagator};

/// Which degree function normalizes `A + I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DegreeStrategy {
    /// Degree centrality, normalized once before training.
    Centrality,
    /// Gaussian neighborhood degree, recomputed from `H0` every epoch.
    Grande { sigma: f64 },
    /// Caller-provided constant degrees.
    Fixed { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub adam: AdamConfig,
    pub degree: DegreeStrategy,
    /// Seeds the dropout stream.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            adam: AdamConfig::default(),
            degree: DegreeStrategy::Centrality,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return arg_err("epochs must be at least 1");
        }
        let a = &self.adam;
        if !(a.lr >= 0.0 && a.lr.is_finite()) {
            return arg_err(format!("learning rate {} must be non-negative", a.lr));
        }
        if !(0.0..1.0).contains(&a.beta1) || !(0.0..1.0).contains(&a.beta2) || a.eps.is_nan() || a.eps <= 0.0 {
            return arg_err("Adam betas must lie in [0, 1) and eps must be positive");
        }
        if let DegreeStrategy::Grande { sigma } = self.degree {
            if !(sigma > 0.0 && sigma.is_finite()) {
                return arg_err(format!("sigma must be positive, got {sigma}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Training loss of every epoch, before that epoch's optimizer step.
    pub loss_trace: Vec<f64>,
    /// Normalized propagator matching the trained weights; use it for prediction.
    pub a_hat: SparsePropagator,
}

fn normalized_propagator(
    base: &SparsePropagator,
    strategy: &DegreeStrategy,
    model: &Model,
    x: &DenseMatrix,
) -> Result<SparsePropagator> {
    match strategy {
        DegreeStrategy::Centrality => normalize_adjacency(base, &degree_centrality(base)),
        DegreeStrategy::Fixed { values } => normalize_with(base, values),
        DegreeStrategy::Grande { sigma } => {
            let h0 = model.initial_representation(x)?;
            normalize_adjacency(base, &grande_degrees(base, &h0, *sigma)?)
        }
    }
}

/// Full-graph training with Adam.
///
/// Every epoch: refresh the Gaussian degrees from the current weights (only
/// for [`DegreeStrategy::Grande`]), then forward, masked cross-entropy,
/// backward and one optimizer step. Centrality and fixed degrees are
/// normalized once. Neither `x` nor `graph` is modified.
pub fn train(
    model: &mut Model,
    x: &DenseMatrix,
    graph: &NeighborGraph,
    labels: &[usize],
    train_mask: &[usize],
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if train_mask.is_empty() {
        return arg_err("training mask is empty");
    }
    if x.rows() != graph.n() || labels.len() != graph.n() {
        return dim_err(format!(
            "features have {} rows, labels {}, graph {} nodes",
            x.rows(),
            labels.len(),
            graph.n()
        ));
    }
    let base = to_propagator_with_self_loops(graph);
    let dynamic = matches!(cfg.degree, DegreeStrategy::Grande { .. });
    let mut a_hat = normalized_propagator(&base, &cfg.degree, model, x)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut loss_trace = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        if dynamic && epoch > 1 {
            a_hat = normalized_propagator(&base, &cfg.degree, model, x)?;
        }
        model.zero_grad();
        let loss = model.accumulate_gradients(x, &a_hat, labels, train_mask, &mut rng)?;
        if !loss.is_finite() {
            return Err(Error::Divergence { epoch, loss });
        }
        loss_trace.push(loss);
        model.adam_step(&cfg.adam);
    }
    if dynamic {
        a_hat = normalized_propagator(&base, &cfg.degree, model, x)?;
    }
    Ok(TrainOutcome { loss_trace, a_hat })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelSpec;

    fn tiny() -> (DenseMatrix, NeighborGraph, Vec<usize>) {
        let x = DenseMatrix::from_rows(&[
            [1.0, 0.1],
            [0.9, 0.0],
            [1.1, 0.2],
            [0.0, 1.0],
            [0.1, 0.9],
            [0.2, 1.1],
        ])
        .unwrap();
        let g = NeighborGraph::from_edges(6, 2, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)])
            .unwrap();
        (x, g, vec![0, 0, 0, 1, 1, 1])
    }

    #[test]
    fn zero_learning_rate_leaves_weights() {
        let (x, g, y) = tiny();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut m = ModelSpec::sgc_default().build(2, 2, &mut rng).unwrap();
        let before = m.parameters()[0].value.clone();
        let mut cfg = TrainConfig {
            epochs: 1,
            ..Default::default()
        };
        cfg.adam.lr = 0.0;
        let out = train(&mut m, &x, &g, &y, &[0, 3], &cfg).unwrap();
        assert_eq!(out.loss_trace.len(), 1);
        assert_eq!(m.parameters()[0].value, before);
    }

    #[test]
    fn loss_decreases_on_separable_data() {
        let (x, g, y) = tiny();
        for spec in [
            ModelSpec::sgc_default(),
            ModelSpec::Appnp {
                hidden: 8,
                k_steps: 3,
                alpha: 0.1,
                dropout: 0.0,
            },
        ] {
            let mut m = spec.build(2, 2, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
            let cfg = TrainConfig {
                epochs: 100,
                adam: AdamConfig {
                    lr: 0.05,
                    ..Default::default()
                },
                degree: DegreeStrategy::Grande { sigma: 0.2 },
                seed: 3,
            };
            let out = train(&mut m, &x, &g, &y, &[0, 5], &cfg).unwrap();
            assert_eq!(out.loss_trace.len(), 100);
            assert!(out.loss_trace[99] < out.loss_trace[0]);
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let (x, g, y) = tiny();
        let mut m = ModelSpec::sgc_default().build(2, 2, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let cfg = TrainConfig::default();
        assert!(train(&mut m, &x, &g, &y, &[], &cfg).is_err());
        let bad = TrainConfig {
            epochs: 0,
            ..Default::default()
        };
        assert!(train(&mut m, &x, &g, &y, &[0], &bad).is_err());
        let bad = TrainConfig {
            degree: DegreeStrategy::Grande { sigma: 0.0 },
            ..Default::default()
        };
        assert!(train(&mut m, &x, &g, &y, &[0], &bad).is_err());
        assert!(train(&mut m, &x, &g, &y[..5], &[0], &cfg).is_err());
    }

    #[test]
    fn divergence_names_the_epoch() {
        let (x, g, y) = tiny();
        let mut m = ModelSpec::sgc_default().build(2, 2, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        if let Model::Sgc(s) = &mut m {
            s.w.value.set(0, 0, f64::NAN);
        }
        let cfg = TrainConfig::default();
        match train(&mut m, &x, &g, &y, &[0, 3], &cfg) {
            Err(Error::Divergence { epoch, .. }) => assert_eq!(epoch, 1),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn inputs_are_untouched() {
        let (x, g, y) = tiny();
        let (x0, g0) = (x.clone(), g.clone());
        let mut m = ModelSpec::appnp_default().build(2, 2, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let cfg = TrainConfig {
            epochs: 3,
            degree: DegreeStrategy::Grande { sigma: 0.2 },
            ..Default::default()
        };
        train(&mut m, &x, &g, &y, &[1, 4], &cfg).unwrap();
        assert_eq!(x, x0);
        assert_eq!(g, g0);
    }
}
