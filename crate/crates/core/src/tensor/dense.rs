use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Result};

/// Row-major dense matrix of `f64`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return dim_err(format!(
                "buffer of length {} cannot hold a {}x{} matrix",
                data.len(),
                rows,
                cols
            ));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from equal-length rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return dim_err(format!("row {} has {} columns, expected {}", i, r.len(), cols));
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn fill(&mut self, v: f64) {
        self.data.iter_mut().for_each(|x| *x = v);
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &DenseMatrix) -> Result<()> {
        self.check_same_shape(other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn scale(&mut self, alpha: f64) {
        self.data.iter_mut().for_each(|x| *x *= alpha);
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub(crate) fn check_same_shape(&self, other: &DenseMatrix) -> Result<()> {
        if self.shape() != other.shape() {
            return dim_err(format!(
                "shapes {:?} and {:?} differ",
                self.shape(),
                other.shape()
            ));
        }
        Ok(())
    }

    /// Copies the selected rows, in order, into a new matrix.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        if self.rows > 8 {
            writeln!(f, "  ... {} more rows", self.rows - 8)?;
        }
        write!(f, "]")
    }
}

/// Standard matrix product `a * b`.
pub fn matmul(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.cols != b.rows {
        return dim_err(format!(
            "matmul of {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        ));
    }
    let mut out = DenseMatrix::zeros(a.rows, b.cols);
    // i-k-j order keeps the inner loop contiguous in both `b` and `out`.
    for i in 0..a.rows {
        let a_row = a.row(i);
        let out_row = &mut out.data[i * b.cols..(i + 1) * b.cols];
        for (k, &aik) in a_row.iter().enumerate() {
            if aik == 0.0 {
                continue;
            }
            let b_row = &b.data[k * b.cols..(k + 1) * b.cols];
            for (o, &bkj) in out_row.iter_mut().zip(b_row) {
                *o += aik * bkj;
            }
        }
    }
    Ok(out)
}

/// `aᵀ * b` without materializing the transpose.
pub fn matmul_tn(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.rows != b.rows {
        return dim_err(format!(
            "matmul_tn of ({}x{})ᵀ by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        ));
    }
    let mut out = DenseMatrix::zeros(a.cols, b.cols);
    for r in 0..a.rows {
        let a_row = a.row(r);
        let b_row = b.row(r);
        for (i, &ari) in a_row.iter().enumerate() {
            if ari == 0.0 {
                continue;
            }
            let out_row = &mut out.data[i * b.cols..(i + 1) * b.cols];
            for (o, &brj) in out_row.iter_mut().zip(b_row) {
                *o += ari * brj;
            }
        }
    }
    Ok(out)
}

/// `a * bᵀ` without materializing the transpose.
pub fn matmul_nt(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.cols != b.cols {
        return dim_err(format!(
            "matmul_nt of {}x{} by ({}x{})ᵀ",
            a.rows, a.cols, b.rows, b.cols
        ));
    }
    let mut out = DenseMatrix::zeros(a.rows, b.rows);
    for i in 0..a.rows {
        let a_row = a.row(i);
        for j in 0..b.rows {
            let b_row = b.row(j);
            out.data[i * b.rows + j] = a_row.iter().zip(b_row).map(|(x, y)| x * y).sum();
        }
    }
    Ok(out)
}
