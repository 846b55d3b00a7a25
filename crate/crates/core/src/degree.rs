//! Node degrees and symmetric degree normalization.
//!
//! Two degree functions are available:
//!
//! * degree centrality, `deg_ctr(q) = |N(q)|` with the self-loop counted;
//! * the Gaussian neighborhood degree `deg_ctr(q) + s_neigh(q)`, where
//!   `s_neigh(q)` is the mean over the closed neighborhood of
//!   `1 / exp(-rho'(q,i)^2 / sigma)` and `rho'` are Euclidean distances
//!   between current node representations, min-max normalized over every
//!   stored propagator entry (self pairs included).
//!
//! Since the kernel lies in `[exp(-1/sigma), 1]`, the penalty is bounded by
//! `1 <= s_neigh(q) <= exp(1/sigma)`.

use serde::{Deserialize, Serialize};

use crate::error::{arg_err, dim_err, Error, Result};
use crate::graph::euclidean;
use crate::tensor::{DenseMatrix, SparsePropagator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DegreeKind {
    Centrality,
    Grande,
}

/// Per-node degree values.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeVector {
    pub values: Vec<f64>,
    pub kind: DegreeKind,
    /// Kernel width, set only for [`DegreeKind::Grande`].
    pub sigma: Option<f64>,
}

impl DegreeVector {
    pub fn n(&self) -> usize {
        self.values.len()
    }
}

/// Raw and min-max normalized distances for every stored propagator entry,
/// laid out in the propagator's CSR order.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeDistanceTable {
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    raw: Vec<f64>,
    normalized: Vec<f64>,
}

impl EdgeDistanceTable {
    pub fn n(&self) -> usize {
        self.row_offsets.len() - 1
    }

    pub fn row_cols(&self, q: usize) -> &[usize] {
        &self.col_indices[self.row_offsets[q]..self.row_offsets[q + 1]]
    }

    pub fn row_raw(&self, q: usize) -> &[f64] {
        &self.raw[self.row_offsets[q]..self.row_offsets[q + 1]]
    }

    pub fn row_normalized(&self, q: usize) -> &[f64] {
        &self.normalized[self.row_offsets[q]..self.row_offsets[q + 1]]
    }

    pub fn raw(&self) -> &[f64] {
        &self.raw
    }

    pub fn normalized(&self) -> &[f64] {
        &self.normalized
    }

    /// Table with caller-supplied normalized distances on `p`'s pattern.
    /// Raw distances are set equal to the normalized ones.
    pub fn from_normalized(p: &SparsePropagator, normalized: Vec<f64>) -> Result<Self> {
        if normalized.len() != p.nnz() {
            return dim_err("normalized distances do not cover the propagator pattern");
        }
        if normalized.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return arg_err("normalized distances must lie in [0, 1]");
        }
        Ok(Self {
            row_offsets: p.row_offsets().to_vec(),
            col_indices: p.col_indices().to_vec(),
            raw: normalized.clone(),
            normalized,
        })
    }
}

/// Counts stored entries per row (self-loop included).
pub fn degree_centrality(p: &SparsePropagator) -> DegreeVector {
    DegreeVector {
        values: (0..p.n()).map(|i| p.row_len(i) as f64).collect(),
        kind: DegreeKind::Centrality,
        sigma: None,
    }
}

/// Euclidean distances between rows of `h` for every stored entry of `p`,
/// min-max normalized over the whole table. When all distances are equal
/// every normalized value is 0.
pub fn compute_edge_distances(p: &SparsePropagator, h: &DenseMatrix) -> Result<EdgeDistanceTable> {
    if h.rows() != p.n() {
        return dim_err(format!(
            "representation has {} rows, propagator {} nodes",
            h.rows(),
            p.n()
        ));
    }
    let mut raw = Vec::with_capacity(p.nnz());
    for q in 0..p.n() {
        let hq = h.row(q);
        for &i in p.row_cols(q) {
            raw.push(if i == q { 0.0 } else { euclidean(hq, h.row(i)) });
        }
    }
    let (min, max) = raw
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invariant("non-finite representation distance".into()));
    }
    let span = max - min;
    let normalized = if raw.is_empty() || span <= 0.0 {
        vec![0.0; raw.len()]
    } else {
        raw.iter().map(|v| ((v - min) / span).clamp(0.0, 1.0)).collect()
    };
    Ok(EdgeDistanceTable {
        row_offsets: p.row_offsets().to_vec(),
        col_indices: p.col_indices().to_vec(),
        raw,
        normalized,
    })
}

/// Gaussian similarity `exp(-rho'^2 / sigma)` of a normalized distance.
#[inline]
pub fn gaussian_kernel(rho_norm: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    Ok((-(rho_norm * rho_norm) / sigma).exp())
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return arg_err(format!("sigma must be positive and finite, got {sigma}"));
    }
    Ok(())
}

/// `s_neigh(q) = (1/deg_ctr(q)) Σ_{i ∈ N(q)} 1 / f_g(rho'(q,i), sigma)`.
pub fn neighborhood_penalty(
    table: &EdgeDistanceTable,
    deg_ctr: &DegreeVector,
    sigma: f64,
) -> Result<Vec<f64>> {
    check_sigma(sigma)?;
    if deg_ctr.kind != DegreeKind::Centrality {
        return arg_err("neighborhood penalty needs centrality degrees");
    }
    if deg_ctr.n() != table.n() {
        return dim_err("degree vector and distance table cover different node counts");
    }
    (0..table.n())
        .map(|q| {
            let deg = deg_ctr.values[q];
            if deg < 1.0 {
                return Err(Error::Invariant(format!("node {q} has degree {deg} < 1")));
            }
            let mut sum = 0.0;
            for &rho in table.row_normalized(q) {
                sum += 1.0 / gaussian_kernel(rho, sigma)?;
            }
            Ok(sum / deg)
        })
        .collect()
}

/// Elementwise `deg_ctr + penalty`.
pub fn grande_degree(deg_ctr: &DegreeVector, penalty: &[f64], sigma: f64) -> Result<DegreeVector> {
    if deg_ctr.n() != penalty.len() {
        return dim_err("degree vector and penalty lengths differ");
    }
    Ok(DegreeVector {
        values: deg_ctr.values.iter().zip(penalty).map(|(d, s)| d + s).collect(),
        kind: DegreeKind::Grande,
        sigma: Some(sigma),
    })
}

/// Gaussian neighborhood degrees of the nodes of `p` for representations `h`.
pub fn grande_degrees(p: &SparsePropagator, h: &DenseMatrix, sigma: f64) -> Result<DegreeVector> {
    let ctr = degree_centrality(p);
    let table = compute_edge_distances(p, h)?;
    let penalty = neighborhood_penalty(&table, &ctr, sigma)?;
    grande_degree(&ctr, &penalty, sigma)
}

/// Replaces every stored `(i, j)` value with `1 / sqrt(deg[i] * deg[j])`.
///
/// Only the pattern of `p` is used. Applied to `A + I` this yields
/// `D^-1/2 (A + I) D^-1/2`.
pub fn normalize_adjacency(p: &SparsePropagator, deg: &DegreeVector) -> Result<SparsePropagator> {
    normalize_with(p, &deg.values)
}

pub(crate) fn normalize_with(p: &SparsePropagator, deg: &[f64]) -> Result<SparsePropagator> {
    if deg.len() != p.n() {
        return dim_err(format!(
            "{} degrees for a propagator over {} nodes",
            deg.len(),
            p.n()
        ));
    }
    if let Some((i, d)) = deg.iter().enumerate().find(|(_, d)| !(**d > 0.0 && d.is_finite())) {
        return Err(Error::Invariant(format!("node {i} has non-positive degree {d}")));
    }
    let mut values = Vec::with_capacity(p.nnz());
    for i in 0..p.n() {
        for &j in p.row_cols(i) {
            values.push(1.0 / (deg[i] * deg[j]).sqrt());
        }
    }
    p.with_values(values)
}
