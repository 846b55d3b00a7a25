use rand::Rng;

use crate::error::Result;
use crate::tensor::{glorot_init, matmul, matmul_tn, DenseMatrix, ParameterBlock, SparsePropagator};

/// Simplified graph convolution: `Z = Â^K (X W)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SgcModel {
    pub w: ParameterBlock,
    pub k_steps: usize,
}

/// Borrowed inputs of a forward pass, enough to run the adjoint.
#[derive(Debug)]
pub struct SgcCache<'a> {
    x: &'a DenseMatrix,
    a_hat: &'a SparsePropagator,
    k_steps: usize,
}

impl SgcModel {
    pub fn new(w: DenseMatrix, k_steps: usize) -> Self {
        Self {
            w: ParameterBlock::new(w),
            k_steps,
        }
    }

    pub fn init<R: Rng + ?Sized>(d: usize, c: usize, k_steps: usize, rng: &mut R) -> Self {
        Self::new(glorot_init(d, c, rng), k_steps)
    }

    /// `H0 = X W`.
    pub fn initial_representation(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        matmul(x, &self.w.value)
    }

    pub fn forward<'a>(
        &self,
        x: &'a DenseMatrix,
        a_hat: &'a SparsePropagator,
    ) -> Result<(DenseMatrix, SgcCache<'a>)> {
        let h0 = self.initial_representation(x)?;
        let z = a_hat.power_apply(&h0, self.k_steps)?;
        Ok((
            z,
            SgcCache {
                x,
                a_hat,
                k_steps: self.k_steps,
            },
        ))
    }

    /// Gradient w.r.t. `W`: `(Â^K X)ᵀ grad_z`, evaluated as `Xᵀ (Â^K grad_z)`
    /// since `Â` is symmetric.
    pub fn backward(&self, cache: &SgcCache<'_>, grad_z: &DenseMatrix) -> Result<DenseMatrix> {
        let g_h0 = cache.a_hat.power_apply(grad_z, cache.k_steps)?;
        matmul_tn(cache.x, &g_h0)
    }
}
