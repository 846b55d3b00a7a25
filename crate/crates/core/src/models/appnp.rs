use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{arg_err, Result};
use crate::tensor::{
    dropout_apply, glorot_init, matmul, matmul_nt, matmul_tn, relu_backward, relu_forward,
    DenseMatrix, DropoutMask, ParameterBlock, SparsePropagator,
};

/// APPNP: an MLP producing `H0` followed by `K` steps of
/// `H(k) = (1 - α) Â H(k-1) + α H0`.
///
/// With `w2` present the MLP is `dropout -> W1 -> relu -> dropout -> W2`;
/// without it, a single `dropout -> W1` map where `W1` is `d x c`.
#[derive(Debug, Clone, PartialEq)]
pub struct AppnpModel {
    pub w1: ParameterBlock,
    pub w2: Option<ParameterBlock>,
    pub k_steps: usize,
    pub alpha: f64,
    pub dropout_rate: f64,
}

struct HiddenCache {
    dropped: DenseMatrix,
    relu_mask: Vec<bool>,
    drop_mask: DropoutMask,
}

pub struct AppnpCache<'a> {
    a_hat: &'a SparsePropagator,
    x_dropped: DenseMatrix,
    hidden: Option<HiddenCache>,
    k_steps: usize,
    alpha: f64,
}

/// Gradients produced by [`AppnpModel::backward`].
#[derive(Debug, Clone)]
pub struct AppnpGrads {
    pub w1: DenseMatrix,
    pub w2: Option<DenseMatrix>,
}

impl AppnpModel {
    pub fn new(
        w1: DenseMatrix,
        w2: Option<DenseMatrix>,
        k_steps: usize,
        alpha: f64,
        dropout_rate: f64,
    ) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return arg_err(format!("teleport probability {alpha} outside (0, 1)"));
        }
        if !(0.0..1.0).contains(&dropout_rate) {
            return arg_err(format!("dropout rate {dropout_rate} outside [0, 1)"));
        }
        if let Some(w2) = &w2 {
            if w2.rows() != w1.cols() {
                return arg_err(format!(
                    "hidden widths disagree: W1 has {} columns, W2 {} rows",
                    w1.cols(),
                    w2.rows()
                ));
            }
        }
        Ok(Self {
            w1: ParameterBlock::new(w1),
            w2: w2.map(ParameterBlock::new),
            k_steps,
            alpha,
            dropout_rate,
        })
    }

    /// Glorot-initialized model. `hidden == 0` selects the single linear map.
    pub fn init<R: Rng + ?Sized>(
        d: usize,
        c: usize,
        hidden: usize,
        k_steps: usize,
        alpha: f64,
        dropout_rate: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if hidden == 0 {
            Self::new(glorot_init(d, c, rng), None, k_steps, alpha, dropout_rate)
        } else {
            let w1 = glorot_init(d, hidden, rng);
            let w2 = glorot_init(hidden, c, rng);
            Self::new(w1, Some(w2), k_steps, alpha, dropout_rate)
        }
    }

    pub fn hidden(&self) -> usize {
        if self.w2.is_some() {
            self.w1.shape().1
        } else {
            0
        }
    }

    fn mlp(
        &self,
        x: &DenseMatrix,
        training: bool,
        rng: &mut dyn RngCore,
    ) -> Result<(DenseMatrix, DenseMatrix, Option<HiddenCache>)> {
        let (x_dropped, _) = dropout_apply(x, self.dropout_rate, rng, training)?;
        let a = matmul(&x_dropped, &self.w1.value)?;
        match &self.w2 {
            None => Ok((a, x_dropped, None)),
            Some(w2) => {
                let (r, relu_mask) = relu_forward(&a);
                let (dropped, drop_mask) = dropout_apply(&r, self.dropout_rate, rng, training)?;
                let h0 = matmul(&dropped, &w2.value)?;
                Ok((
                    h0,
                    x_dropped,
                    Some(HiddenCache {
                        dropped,
                        relu_mask,
                        drop_mask,
                    }),
                ))
            }
        }
    }

    /// `H0` in evaluation mode (no dropout).
    pub fn initial_representation(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        // Dropout is off, so the stream is never drawn from.
        let mut unused = ChaCha8Rng::seed_from_u64(0);
        Ok(self.mlp(x, false, &mut unused)?.0)
    }

    /// Evaluation-mode output `Z`.
    pub fn logits(&self, x: &DenseMatrix, a_hat: &SparsePropagator) -> Result<DenseMatrix> {
        let h0 = self.initial_representation(x)?;
        propagate(a_hat, &h0, self.k_steps, self.alpha)
    }

    pub fn forward<'a>(
        &self,
        x: &DenseMatrix,
        a_hat: &'a SparsePropagator,
        training: bool,
        rng: &mut dyn RngCore,
    ) -> Result<(DenseMatrix, AppnpCache<'a>)> {
        let (h0, x_dropped, hidden) = self.mlp(x, training, rng)?;
        let z = propagate(a_hat, &h0, self.k_steps, self.alpha)?;
        Ok((
            z,
            AppnpCache {
                a_hat,
                x_dropped,
                hidden,
                k_steps: self.k_steps,
                alpha: self.alpha,
            },
        ))
    }

    pub fn backward(&self, cache: &AppnpCache<'_>, grad_z: &DenseMatrix) -> Result<AppnpGrads> {
        let g_h0 = propagate_adjoint(cache.a_hat, grad_z, cache.k_steps, cache.alpha)?;
        match (&self.w2, &cache.hidden) {
            (Some(w2), Some(h)) => {
                let g_w2 = matmul_tn(&h.dropped, &g_h0)?;
                let g_dropped = matmul_nt(&g_h0, &w2.value)?;
                let g_relu = h.drop_mask.backward(&g_dropped)?;
                let g_a = relu_backward(&g_relu, &h.relu_mask)?;
                let g_w1 = matmul_tn(&cache.x_dropped, &g_a)?;
                Ok(AppnpGrads {
                    w1: g_w1,
                    w2: Some(g_w2),
                })
            }
            (None, None) => Ok(AppnpGrads {
                w1: matmul_tn(&cache.x_dropped, &g_h0)?,
                w2: None,
            }),
            _ => arg_err("cache does not belong to this model"),
        }
    }
}

/// `K` steps of `H(k) = (1 - α) Â H(k-1) + α H0`.
pub fn propagate(
    a_hat: &SparsePropagator,
    h0: &DenseMatrix,
    k_steps: usize,
    alpha: f64,
) -> Result<DenseMatrix> {
    let mut h = h0.clone();
    let mut tmp = DenseMatrix::zeros(h0.rows(), h0.cols());
    for _ in 0..k_steps {
        a_hat.spmm_into(&h, &mut tmp)?;
        for ((out, &diffused), &start) in h
            .as_mut_slice()
            .iter_mut()
            .zip(tmp.as_slice())
            .zip(h0.as_slice())
        {
            // Same as (1-α)·diffused + α·start, but exact when diffused == start.
            *out = start + (1.0 - alpha) * (diffused - start);
        }
    }
    Ok(h)
}

/// Adjoint of [`propagate`] for symmetric `Â`: returns the gradient w.r.t. `H0`.
fn propagate_adjoint(
    a_hat: &SparsePropagator,
    grad_z: &DenseMatrix,
    k_steps: usize,
    alpha: f64,
) -> Result<DenseMatrix> {
    let mut g = grad_z.clone();
    let mut acc = DenseMatrix::zeros(grad_z.rows(), grad_z.cols());
    let mut tmp = DenseMatrix::zeros(grad_z.rows(), grad_z.cols());
    for _ in 0..k_steps {
        acc.axpy(alpha, &g)?;
        a_hat.spmm_into(&g, &mut tmp)?;
        for (gv, &t) in g.as_mut_slice().iter_mut().zip(tmp.as_slice()) {
            *gv = (1.0 - alpha) * t;
        }
    }
    acc.axpy(1.0, &g)?;
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn averaging_pair() -> SparsePropagator {
        SparsePropagator::from_csr(2, vec![0, 2, 4], vec![0, 1, 0, 1], vec![0.5; 4]).unwrap()
    }

    #[test]
    fn hand_expansion() {
        let h0 = DenseMatrix::from_rows(&[[1.0], [0.0]]).unwrap();
        let z = propagate(&averaging_pair(), &h0, 1, 0.2).unwrap();
        assert!((z.get(0, 0) - 0.6).abs() < 1e-15);
        assert!((z.get(1, 0) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn identity_propagator_is_a_fixed_point() {
        let h0 = DenseMatrix::from_rows(&[[0.3, -1.7], [2.5, 0.125], [9.0, -4.0]]).unwrap();
        for (k, alpha) in [(1, 0.1), (7, 0.5), (20, 0.9)] {
            let z = propagate(&SparsePropagator::identity(3), &h0, k, alpha).unwrap();
            assert_eq!(z, h0);
        }
    }

    #[test]
    fn pure_teleport_limit() {
        let h0 = DenseMatrix::from_rows(&[[1.0, 2.0], [-3.0, 0.5]]).unwrap();
        let z = propagate(&averaging_pair(), &h0, 10, 1.0 - 1e-12).unwrap();
        assert!(z.max_abs_diff(&h0).unwrap() < 1e-9);
    }

    #[test]
    fn rejects_bad_alpha() {
        let w = DenseMatrix::zeros(2, 2);
        assert!(AppnpModel::new(w.clone(), None, 1, 0.0, 0.0).is_err());
        assert!(AppnpModel::new(w.clone(), None, 1, 1.0, 0.0).is_err());
        assert!(AppnpModel::new(w, Some(DenseMatrix::zeros(3, 2)), 1, 0.1, 0.0).is_err());
    }

    #[test]
    fn zero_upstream_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = AppnpModel::init(3, 2, 4, 3, 0.1, 0.0, &mut rng).unwrap();
        let x = glorot_init(2, 3, &mut rng);
        let p = averaging_pair();
        let (_, cache) = m.forward(&x, &p, true, &mut rng).unwrap();
        let g = m.backward(&cache, &DenseMatrix::zeros(2, 2)).unwrap();
        assert!(g.w1.as_slice().iter().all(|&v| v == 0.0));
        assert!(g.w2.unwrap().as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn k0_is_plain_mlp_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = AppnpModel::init(3, 2, 5, 0, 0.1, 0.0, &mut rng).unwrap();
        let x = glorot_init(2, 3, &mut rng);
        let gz = glorot_init(2, 2, &mut rng);
        let p = averaging_pair();
        let (_, cache) = m.forward(&x, &p, false, &mut rng).unwrap();
        let g = m.backward(&cache, &gz).unwrap();

        let a = matmul(&x, &m.w1.value).unwrap();
        let (r, mask) = relu_forward(&a);
        let w2 = &m.w2.as_ref().unwrap().value;
        let g_w2 = matmul_tn(&r, &gz).unwrap();
        let g_a = relu_backward(&matmul_nt(&gz, w2).unwrap(), &mask).unwrap();
        let g_w1 = matmul_tn(&x, &g_a).unwrap();
        assert_eq!(g.w1, g_w1);
        assert_eq!(g.w2.unwrap(), g_w2);
    }

    #[test]
    fn eval_representation_ignores_dropout() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let m = AppnpModel::init(4, 3, 6, 2, 0.1, 0.5, &mut rng).unwrap();
        let x = glorot_init(5, 4, &mut rng);
        let a = m.initial_representation(&x).unwrap();
        let b = m.initial_representation(&x).unwrap();
        assert_eq!(a, b);
        let (h0, _, _) = m.mlp(&x, false, &mut rng).unwrap();
        assert_eq!(a, h0);
    }
}
