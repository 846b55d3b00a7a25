use crate::error::{dim_err, Error, Result};
use crate::tensor::DenseMatrix;

/// Symmetric CSR matrix used for graph diffusion.
///
/// Every row stores its diagonal entry explicitly, column indices are
/// strictly increasing within a row, the pattern is structurally symmetric
/// and all values are finite and positive. Both `A + I` and the normalized
/// propagator share this representation.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePropagator {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparsePropagator {
    /// Validates and wraps raw CSR arrays.
    pub fn from_csr(
        n: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != n + 1 || row_offsets[0] != 0 {
            return Err(Error::Invariant(format!(
                "row_offsets must have length {} and start at 0",
                n + 1
            )));
        }
        if *row_offsets.last().unwrap() != col_indices.len() || col_indices.len() != values.len() {
            return Err(Error::Invariant(
                "row_offsets, col_indices and values disagree on nnz".into(),
            ));
        }
        let p = Self {
            n,
            row_offsets,
            col_indices,
            values,
        };
        for i in 0..n {
            if p.row_offsets[i] > p.row_offsets[i + 1] {
                return Err(Error::Invariant(format!("row_offsets decrease at row {i}")));
            }
            let cols = p.row_cols(i);
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Invariant(format!(
                    "columns of row {i} are not strictly increasing"
                )));
            }
            if cols.last().is_some_and(|&c| c >= n) {
                return Err(Error::Invariant(format!("row {i} has a column out of range")));
            }
            if cols.binary_search(&i).is_err() {
                return Err(Error::Invariant(format!("row {i} has no diagonal entry")));
            }
            for &j in cols {
                if p.position(j, i).is_none() {
                    return Err(Error::Invariant(format!(
                        "entry ({i},{j}) has no symmetric partner"
                    )));
                }
            }
        }
        if let Some(v) = p.values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::Invariant(format!(
                "propagator values must be finite and positive, found {v}"
            )));
        }
        Ok(p)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn row_cols(&self, i: usize) -> &[usize] {
        &self.col_indices[self.row_offsets[i]..self.row_offsets[i + 1]]
    }

    #[inline]
    pub fn row_values(&self, i: usize) -> &[f64] {
        &self.values[self.row_offsets[i]..self.row_offsets[i + 1]]
    }

    /// Number of stored entries in row `i`.
    #[inline]
    pub fn row_len(&self, i: usize) -> usize {
        self.row_offsets[i + 1] - self.row_offsets[i]
    }

    /// Index into `values` of entry `(i, j)`, if stored.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        self.row_cols(i)
            .binary_search(&j)
            .ok()
            .map(|k| self.row_offsets[i] + k)
    }

    /// Same sparsity pattern with new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.nnz() {
            return dim_err(format!(
                "{} values for a pattern with {} entries",
                values.len(),
                self.nnz()
            ));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::Invariant(format!(
                "propagator values must be finite and positive, found {v}"
            )));
        }
        Ok(Self {
            n: self.n,
            row_offsets: self.row_offsets.clone(),
            col_indices: self.col_indices.clone(),
            values,
        })
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (&j, &v) in self.row_cols(i).iter().zip(self.row_values(i)) {
                d.set(i, j, v);
            }
        }
        d
    }

    /// One diffusion step: `out[i,:] = Σ_j P[i,j] h[j,:]`.
    pub fn spmm(&self, h: &DenseMatrix) -> Result<DenseMatrix> {
        let mut out = DenseMatrix::zeros(h.rows(), h.cols());
        self.spmm_into(h, &mut out)?;
        Ok(out)
    }

    /// [`spmm`](Self::spmm) writing into a preallocated output.
    pub fn spmm_into(&self, h: &DenseMatrix, out: &mut DenseMatrix) -> Result<()> {
        if h.rows() != self.n {
            return dim_err(format!(
                "propagator over {} nodes applied to {} rows",
                self.n,
                h.rows()
            ));
        }
        if out.shape() != h.shape() {
            return dim_err("spmm output buffer has the wrong shape");
        }
        let c = h.cols();
        let src = h.as_slice();
        let dst = out.as_mut_slice();
        for i in 0..self.n {
            let out_row = &mut dst[i * c..(i + 1) * c];
            out_row.fill(0.0);
            for (&j, &v) in self.row_cols(i).iter().zip(self.row_values(i)) {
                let h_row = &src[j * c..(j + 1) * c];
                for (o, &x) in out_row.iter_mut().zip(h_row) {
                    *o += v * x;
                }
            }
        }
        Ok(())
    }

    /// Applies the propagator `steps` times.
    pub fn power_apply(&self, h: &DenseMatrix, steps: usize) -> Result<DenseMatrix> {
        let mut cur = h.clone();
        if steps == 0 {
            if h.rows() != self.n {
                return dim_err("power_apply row count mismatch");
            }
            return Ok(cur);
        }
        let mut next = DenseMatrix::zeros(h.rows(), h.cols());
        for _ in 0..steps {
            self.spmm_into(&cur, &mut next)?;
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    /// Dominant eigenvalue estimate by power iteration with a Rayleigh
    /// quotient. For a symmetric non-negative matrix and a positive start
    /// vector this converges to the spectral radius from below.
    pub fn dominant_eigenvalue(&self, max_iters: usize, tol: f64) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let mut v = DenseMatrix::from_vec(
            self.n,
            1,
            (0..self.n).map(|i| 1.0 + (i % 7) as f64 * 0.01).collect(),
        )
        .expect("column vector");
        normalize(&mut v);
        let mut lambda = 0.0;
        for _ in 0..max_iters {
            let w = self.spmm(&v).expect("square propagator");
            let next: f64 = v.as_slice().iter().zip(w.as_slice()).map(|(a, b)| a * b).sum();
            v = w;
            normalize(&mut v);
            if (next - lambda).abs() <= tol {
                return next;
            }
            lambda = next;
        }
        lambda
    }
}

fn normalize(v: &mut DenseMatrix) {
    let norm = v.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.scale(1.0 / norm);
    }
}
