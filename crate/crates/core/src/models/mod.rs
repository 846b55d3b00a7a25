//! Diffusion GNNs and their training loop.

mod appnp;
mod sgc;
mod train;

pub use appnp::{propagate, AppnpCache, AppnpGrads, AppnpModel};
pub use sgc::{SgcCache, SgcModel};
pub use train::{train, DegreeStrategy, TrainConfig, TrainOutcome};

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::tensor::{cross_entropy_masked, AdamConfig, DenseMatrix, ParameterBlock, SparsePropagator};

/// Architecture and hyperparameters of a model, without weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelSpec {
    Sgc {
        k_steps: usize,
    },
    Appnp {
        hidden: usize,
        k_steps: usize,
        alpha: f64,
        dropout: f64,
    },
}

impl ModelSpec {
    pub fn sgc_default() -> Self {
        ModelSpec::Sgc { k_steps: 2 }
    }

    pub fn appnp_default() -> Self {
        ModelSpec::Appnp {
            hidden: 256,
            k_steps: 10,
            alpha: 0.1,
            dropout: 0.5,
        }
    }

    /// Glorot-initialized model for `d` input features and `c` classes.
    pub fn build<R: Rng + ?Sized>(&self, d: usize, c: usize, rng: &mut R) -> Result<Model> {
        Ok(match *self {
            ModelSpec::Sgc { k_steps } => Model::Sgc(SgcModel::init(d, c, k_steps, rng)),
            ModelSpec::Appnp {
                hidden,
                k_steps,
                alpha,
                dropout,
            } => Model::Appnp(AppnpModel::init(d, c, hidden, k_steps, alpha, dropout, rng)?),
        })
    }
}

/// A trainable model of either family.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Sgc(SgcModel),
    Appnp(AppnpModel),
}

impl Model {
    /// The representation `H0` that enters propagation, in evaluation mode.
    pub fn initial_representation(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        match self {
            Model::Sgc(m) => m.initial_representation(x),
            Model::Appnp(m) => m.initial_representation(x),
        }
    }

    /// Evaluation-mode logits.
    pub fn logits(&self, x: &DenseMatrix, a_hat: &SparsePropagator) -> Result<DenseMatrix> {
        match self {
            Model::Sgc(m) => Ok(m.forward(x, a_hat)?.0),
            Model::Appnp(m) => m.logits(x, a_hat),
        }
    }

    /// Training-mode forward and backward pass. Gradients are added to each
    /// parameter's `grad`; returns the masked cross-entropy.
    pub fn accumulate_gradients(
        &mut self,
        x: &DenseMatrix,
        a_hat: &SparsePropagator,
        labels: &[usize],
        mask: &[usize],
        rng: &mut dyn RngCore,
    ) -> Result<f64> {
        match self {
            Model::Sgc(m) => {
                let (z, cache) = m.forward(x, a_hat)?;
                let (loss, grad_z) = cross_entropy_masked(&z, labels, mask)?;
                let g = m.backward(&cache, &grad_z)?;
                m.w.grad.axpy(1.0, &g)?;
                Ok(loss)
            }
            Model::Appnp(m) => {
                let (z, cache) = m.forward(x, a_hat, true, rng)?;
                let (loss, grad_z) = cross_entropy_masked(&z, labels, mask)?;
                let g = m.backward(&cache, &grad_z)?;
                m.w1.grad.axpy(1.0, &g.w1)?;
                if let (Some(w2), Some(g2)) = (m.w2.as_mut(), g.w2.as_ref()) {
                    w2.grad.axpy(1.0, g2)?;
                }
                Ok(loss)
            }
        }
    }

    pub fn parameters(&self) -> Vec<&ParameterBlock> {
        match self {
            Model::Sgc(m) => vec![&m.w],
            Model::Appnp(m) => std::iter::once(&m.w1).chain(m.w2.as_ref()).collect(),
        }
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut ParameterBlock> {
        match self {
            Model::Sgc(m) => vec![&mut m.w],
            Model::Appnp(m) => std::iter::once(&mut m.w1).chain(m.w2.as_mut()).collect(),
        }
    }

    pub fn zero_grad(&mut self) {
        self.parameters_mut().into_iter().for_each(ParameterBlock::zero_grad);
    }

    pub fn adam_step(&mut self, cfg: &AdamConfig) {
        for p in self.parameters_mut() {
            p.adam_step(cfg);
        }
    }
}

/// Per-row argmax, ties to the lowest index.
pub fn argmax_rows(z: &DenseMatrix) -> Vec<usize> {
    (0..z.rows())
        .map(|i| {
            let row = z.row(i);
            let mut best = 0;
            for (j, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

/// Predicted class of every node.
pub fn predict(model: &Model, x: &DenseMatrix, a_hat: &SparsePropagator) -> Result<Vec<usize>> {
    Ok(argmax_rows(&model.logits(x, a_hat)?))
}
