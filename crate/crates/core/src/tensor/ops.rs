//! Elementwise layers, losses and initialization.

use rand::Rng;

use crate::error::{arg_err, dim_err, Result};
use crate::tensor::DenseMatrix;

/// Row-wise softmax with max subtraction.
pub fn softmax_rows(z: &DenseMatrix) -> DenseMatrix {
    let mut out = z.clone();
    for i in 0..out.rows() {
        let row = out.row_mut(i);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    out
}

fn log_sum_exp(row: &[f64]) -> f64 {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Mean cross-entropy over the masked rows and its gradient w.r.t. `z`.
///
/// The gradient is `(softmax(z) - onehot) / |mask|` on masked rows and zero
/// on every other row.
pub fn cross_entropy_masked(
    z: &DenseMatrix,
    labels: &[usize],
    mask: &[usize],
) -> Result<(f64, DenseMatrix)> {
    if mask.is_empty() {
        return arg_err("cross-entropy mask is empty");
    }
    if labels.len() != z.rows() {
        return dim_err(format!(
            "{} labels for {} logit rows",
            labels.len(),
            z.rows()
        ));
    }
    let c = z.cols();
    let m = mask.len() as f64;
    let mut grad = DenseMatrix::zeros(z.rows(), c);
    let mut loss = 0.0;
    for &i in mask {
        if i >= z.rows() {
            return arg_err(format!("mask index {i} out of range"));
        }
        let y = labels[i];
        if y >= c {
            return arg_err(format!("label {y} of node {i} exceeds {c} classes"));
        }
        let row = z.row(i);
        let lse = log_sum_exp(row);
        loss += lse - row[y];
        let g = grad.row_mut(i);
        for (gj, &zj) in g.iter_mut().zip(row) {
            *gj = (zj - lse).exp() / m;
        }
        g[y] -= 1.0 / m;
    }
    Ok((loss / m, grad))
}

/// Uniform Glorot initialization on `[-a, a]`, `a = sqrt(6 / (rows + cols))`.
pub fn glorot_init<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DenseMatrix {
    let a = (6.0 / (rows + cols) as f64).sqrt();
    let data = (0..rows * cols).map(|_| rng.random_range(-a..=a)).collect();
    DenseMatrix::from_vec(rows, cols, data).expect("sized buffer")
}

pub fn relu_forward(h: &DenseMatrix) -> (DenseMatrix, Vec<bool>) {
    let mut out = h.clone();
    let mut active = Vec::with_capacity(h.as_slice().len());
    for v in out.as_mut_slice() {
        let on = *v > 0.0;
        active.push(on);
        if !on {
            *v = 0.0;
        }
    }
    (out, active)
}

pub fn relu_backward(grad_out: &DenseMatrix, active: &[bool]) -> Result<DenseMatrix> {
    if grad_out.as_slice().len() != active.len() {
        return dim_err("relu mask does not match gradient shape");
    }
    let mut g = grad_out.clone();
    for (v, &on) in g.as_mut_slice().iter_mut().zip(active) {
        if !on {
            *v = 0.0;
        }
    }
    Ok(g)
}

/// Inverted-dropout mask. `scale` is `1 / (1 - rate)`.
#[derive(Debug, Clone)]
pub struct DropoutMask {
    pub kept: Vec<bool>,
    pub scale: f64,
}

impl DropoutMask {
    fn keep_all(len: usize) -> Self {
        Self {
            kept: vec![true; len],
            scale: 1.0,
        }
    }

    pub fn backward(&self, grad_out: &DenseMatrix) -> Result<DenseMatrix> {
        if grad_out.as_slice().len() != self.kept.len() {
            return dim_err("dropout mask does not match gradient shape");
        }
        let mut g = grad_out.clone();
        if self.scale != 1.0 || self.kept.iter().any(|k| !k) {
            for (v, &k) in g.as_mut_slice().iter_mut().zip(&self.kept) {
                *v = if k { *v * self.scale } else { 0.0 };
            }
        }
        Ok(g)
    }
}

/// Inverted dropout. Identity outside training or when `rate == 0`.
pub fn dropout_apply<R: Rng + ?Sized>(
    h: &DenseMatrix,
    rate: f64,
    rng: &mut R,
    training: bool,
) -> Result<(DenseMatrix, DropoutMask)> {
    if !(0.0..1.0).contains(&rate) {
        return arg_err(format!("dropout rate {rate} outside [0, 1)"));
    }
    let len = h.as_slice().len();
    if !training || rate == 0.0 {
        return Ok((h.clone(), DropoutMask::keep_all(len)));
    }
    let scale = 1.0 / (1.0 - rate);
    let mut out = h.clone();
    let mut kept = Vec::with_capacity(len);
    for v in out.as_mut_slice() {
        let k = rng.random::<f64>() >= rate;
        kept.push(k);
        *v = if k { *v * scale } else { 0.0 };
    }
    Ok((out, DropoutMask { kept, scale }))
}
