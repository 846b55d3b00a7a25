//! Dense reference computations shared by the integration tests. Nothing
//! here calls into the library's propagation, loss or gradient code.
#![allow(dead_code)]

use grande_core::{DenseMatrix, NeighborGraph};
use rand::Rng;

pub type Mat = Vec<Vec<f64>>;

pub fn random_mat<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Mat {
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect()
}

pub fn to_dense(m: &Mat) -> DenseMatrix {
    DenseMatrix::from_rows(m).unwrap()
}

pub fn from_dense(m: &DenseMatrix) -> Mat {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

pub fn mm(a: &Mat, b: &Mat) -> Mat {
    let (n, k, m) = (a.len(), b.len(), b.first().map_or(0, Vec::len));
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for j in 0..m {
            let mut s = 0.0;
            for t in 0..k {
                s += a[i][t] * b[t][j];
            }
            out[i][j] = s;
        }
    }
    out
}

pub fn max_abs_diff(a: &Mat, b: &Mat) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Erdős–Rényi edge set.
pub fn random_graph<R: Rng>(n: usize, p: f64, rng: &mut R) -> NeighborGraph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                edges.push((i, j));
            }
        }
    }
    NeighborGraph::from_edges(n, 0, edges).unwrap()
}

/// `A + I` of a graph as a dense 0/1 matrix.
pub fn dense_self_loop_adjacency(g: &NeighborGraph) -> Mat {
    let n = g.n();
    let mut a = vec![vec![0.0; n]; n];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for &(i, j) in g.edges() {
        a[i][j] = 1.0;
        a[j][i] = 1.0;
    }
    a
}

/// `D^-1/2 (A + I) D^-1/2` with `D` the row sums of `A + I`.
pub fn dense_sym_normalized(g: &NeighborGraph) -> Mat {
    let a = dense_self_loop_adjacency(g);
    let d: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
    let n = a.len();
    let mut out = a.clone();
    for i in 0..n {
        for j in 0..n {
            out[i][j] = a[i][j] / (d[i] * d[j]).sqrt();
        }
    }
    out
}

/// Mean cross-entropy of softmax rows over `mask`, via log-sum-exp.
pub fn masked_ce(z: &Mat, labels: &[usize], mask: &[usize]) -> f64 {
    let mut total = 0.0;
    for &i in mask {
        let m = z[i].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + z[i].iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        total += lse - z[i][labels[i]];
    }
    total / mask.len() as f64
}

pub fn sgc_logits(a: &Mat, x: &Mat, w: &Mat, k: usize) -> Mat {
    let mut h = mm(x, w);
    for _ in 0..k {
        h = mm(a, &h);
    }
    h
}

/// APPNP logits without dropout.
pub fn appnp_logits(a: &Mat, x: &Mat, w1: &Mat, w2: Option<&Mat>, k: usize, alpha: f64) -> Mat {
    let mut h0 = mm(x, w1);
    if let Some(w2) = w2 {
        for v in h0.iter_mut().flatten() {
            *v = v.max(0.0);
        }
        h0 = mm(&h0, w2);
    }
    let mut h = h0.clone();
    for _ in 0..k {
        let ah = mm(a, &h);
        for (r, (ar, h0r)) in h.iter_mut().zip(ah.iter().zip(&h0)) {
            for (v, (av, v0)) in r.iter_mut().zip(ar.iter().zip(h0r)) {
                *v = (1.0 - alpha) * av + alpha * v0;
            }
        }
    }
    h
}

/// Central difference of `f` with respect to every entry of `w`.
pub fn numeric_grad(w: &Mat, step: f64, mut f: impl FnMut(&Mat) -> f64) -> Mat {
    let mut g = vec![vec![0.0; w[0].len()]; w.len()];
    let mut probe = w.clone();
    for i in 0..w.len() {
        for j in 0..w[0].len() {
            probe[i][j] = w[i][j] + step;
            let up = f(&probe);
            probe[i][j] = w[i][j] - step;
            let down = f(&probe);
            probe[i][j] = w[i][j];
            g[i][j] = (up - down) / (2.0 * step);
        }
    }
    g
}

/// `‖a - b‖ / max(‖a‖ + ‖b‖, 1e-12)` over all entries.
pub fn relative_error(a: &Mat, b: &Mat) -> f64 {
    let mut diff = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.iter().flatten().zip(b.iter().flatten()) {
        diff += (x - y) * (x - y);
        na += x * x;
        nb += y * y;
    }
    diff.sqrt() / (na.sqrt() + nb.sqrt()).max(1e-12)
}

/// Worst entrywise `|a - b| / max(|a| + |b|, floor)`.
pub fn worst_entry_error(a: &Mat, b: &Mat, floor: f64) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs() / (x.abs() + y.abs()).max(floor))
        .fold(0.0, f64::max)
}

/// Sorted list of `(distance, index)` pairs of all other points; the
/// reference for exact ranked lists.
pub fn brute_force_order(x: &Mat, i: usize) -> Vec<usize> {
    let mut all: Vec<(f64, usize)> = (0..x.len())
        .filter(|&j| j != i)
        .map(|j| {
            let d2: f64 = x[i].iter().zip(&x[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            (d2.sqrt(), j)
        })
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    all.into_iter().map(|(_, j)| j).collect()
}

/// Mutual k-nearest-neighbor edges by full pairwise comparison.
pub fn brute_force_mutual(x: &Mat, k: usize) -> Vec<(usize, usize)> {
    let n = x.len();
    let top: Vec<Vec<usize>> = (0..n).map(|i| brute_force_order(x, i)[..k].to_vec()).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if top[i].contains(&j) && top[j].contains(&i) {
                edges.push((i, j));
            }
        }
    }
    edges
}
