use serde::{Deserialize, Serialize};

use crate::tensor::DenseMatrix;

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// A learnable matrix together with its gradient and Adam moments.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterBlock {
    pub value: DenseMatrix,
    pub grad: DenseMatrix,
    pub adam_m: DenseMatrix,
    pub adam_v: DenseMatrix,
    pub step_count: u64,
}

impl ParameterBlock {
    pub fn new(value: DenseMatrix) -> Self {
        let (r, c) = value.shape();
        Self {
            value,
            grad: DenseMatrix::zeros(r, c),
            adam_m: DenseMatrix::zeros(r, c),
            adam_v: DenseMatrix::zeros(r, c),
            step_count: 0,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.value.shape()
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(0.0);
    }

    /// One bias-corrected Adam update from the accumulated gradient.
    /// The gradient itself is left as is.
    pub fn adam_step(&mut self, cfg: &AdamConfig) {
        self.step_count += 1;
        let t = self.step_count as i32;
        let bc1 = 1.0 - cfg.beta1.powi(t);
        let bc2 = 1.0 - cfg.beta2.powi(t);
        let values = self.value.as_mut_slice();
        let m = self.adam_m.as_mut_slice();
        let v = self.adam_v.as_mut_slice();
        for (((w, &g), m), v) in values.iter_mut().zip(self.grad.as_slice()).zip(m).zip(v) {
            *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
            *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *w -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
        }
    }
}
