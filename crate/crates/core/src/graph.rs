//! Exact Euclidean ranked lists and the reciprocal kNN graph.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::error::{arg_err, Result};
use crate::tensor::{DenseMatrix, SparsePropagator};

/// One entry of a ranked list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

/// Per-node neighbors sorted by ascending distance, self excluded.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedLists {
    n: usize,
    k_max: usize,
    lists: Vec<Vec<Neighbor>>,
}

impl RankedLists {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn list(&self, i: usize) -> &[Neighbor] {
        &self.lists[i]
    }

    /// 1-based rank of `j` in the list of `i`, if present.
    pub fn rank_of(&self, i: usize, j: usize) -> Option<usize> {
        self.lists[i].iter().position(|nb| nb.index == j).map(|r| r + 1)
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

fn by_distance_then_index(a: &Neighbor, b: &Neighbor) -> Ordering {
    a.distance
        .total_cmp(&b.distance)
        .then(a.index.cmp(&b.index))
}

/// Exact `k_max` nearest neighbors of every row of `x`.
///
/// Ties at equal distance go to the smaller node index. Queries run in
/// parallel, each node's list is computed independently.
pub fn compute_ranked_lists(x: &DenseMatrix, k_max: usize) -> Result<RankedLists> {
    let n = x.rows();
    if k_max >= n {
        return arg_err(format!("k_max = {k_max} must be smaller than n = {n}"));
    }
    if x.cols() == 0 {
        return arg_err("features have no columns");
    }
    if !x.is_finite() {
        return arg_err("features contain non-finite values");
    }
    let lists = (0..n)
        .into_par_iter()
        .map(|i| {
            let q = x.row(i);
            let mut cand: Vec<Neighbor> = (0..n)
                .filter(|&j| j != i)
                .map(|j| Neighbor {
                    index: j,
                    distance: euclidean(q, x.row(j)),
                })
                .collect();
            if k_max > 0 && k_max < cand.len() {
                cand.select_nth_unstable_by(k_max - 1, by_distance_then_index);
            }
            cand.truncate(k_max);
            cand.sort_unstable_by(by_distance_then_index);
            cand
        })
        .collect();
    Ok(RankedLists { n, k_max, lists })
}

/// Undirected graph over `n` nodes, edges stored as sorted `(i, j)` with `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph {
    n: usize,
    k: usize,
    edges: Vec<(usize, usize)>,
}

impl NeighborGraph {
    /// Graph from an explicit edge list; pairs are canonicalized and deduplicated.
    pub fn from_edges(n: usize, k: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut out = Vec::new();
        for (a, b) in edges {
            if a == b {
                return arg_err(format!("self pair ({a},{a}) in edge list"));
            }
            if a >= n || b >= n {
                return arg_err(format!("edge ({a},{b}) out of range for n = {n}"));
            }
            out.push((a.min(b), a.max(b)));
        }
        out.sort_unstable();
        out.dedup();
        Ok(Self { n, k, edges: out })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }
}

/// Keeps `{i, j}` iff each is among the first `k` entries of the other's list.
pub fn build_reciprocal_graph(lists: &RankedLists, k: usize) -> Result<NeighborGraph> {
    if k > lists.k_max {
        return arg_err(format!(
            "k = {k} exceeds the ranked-list length {}",
            lists.k_max
        ));
    }
    let n = lists.n;
    let mut in_top_k = vec![Vec::new(); n];
    for (i, list) in lists.lists.iter().enumerate() {
        let mut ids: Vec<usize> = list[..k].iter().map(|nb| nb.index).collect();
        ids.sort_unstable();
        in_top_k[i] = ids;
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for &j in &in_top_k[i] {
            if i < j && in_top_k[j].binary_search(&i).is_ok() {
                edges.push((i, j));
            }
        }
    }
    edges.sort_unstable();
    Ok(NeighborGraph { n, k, edges })
}

/// `A + I` as a propagator: 1.0 on every edge in both directions and on the diagonal.
pub fn to_propagator_with_self_loops(g: &NeighborGraph) -> SparsePropagator {
    let n = g.n;
    let mut adj: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    for &(i, j) in &g.edges {
        adj[i].push(j);
        adj[j].push(i);
    }
    let mut row_offsets = Vec::with_capacity(n + 1);
    let mut col_indices = Vec::with_capacity(n + 2 * g.edges.len());
    row_offsets.push(0);
    for mut row in adj {
        row.sort_unstable();
        col_indices.extend(row);
        row_offsets.push(col_indices.len());
    }
    let nnz = col_indices.len();
    SparsePropagator::from_csr(n, row_offsets, col_indices, vec![1.0; nnz])
        .expect("edge set yields a valid symmetric pattern")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> DenseMatrix {
        DenseMatrix::from_rows(&[[0.0], [1.0], [2.0], [10.0]]).unwrap()
    }

    fn ids(l: &[Neighbor]) -> Vec<usize> {
        l.iter().map(|nb| nb.index).collect()
    }

    #[test]
    fn line_ranked_lists() {
        let r = compute_ranked_lists(&line(), 2).unwrap();
        assert_eq!(ids(r.list(0)), vec![1, 2]);
        assert_eq!(ids(r.list(1)), vec![0, 2]);
        assert_eq!(ids(r.list(2)), vec![1, 0]);
        assert_eq!(ids(r.list(3)), vec![2, 1]);
        assert_eq!(r.list(3)[0].distance, 8.0);
    }

    #[test]
    fn coincident_points() {
        let x = DenseMatrix::from_rows(&[[1.0, 1.0], [1.0, 1.0], [5.0, 5.0]]).unwrap();
        let r = compute_ranked_lists(&x, 1).unwrap();
        assert_eq!(r.list(0)[0], Neighbor { index: 1, distance: 0.0 });
        assert_eq!(r.list(1)[0], Neighbor { index: 0, distance: 0.0 });
    }

    #[test]
    fn k_max_must_be_below_n() {
        assert!(compute_ranked_lists(&line(), 4).is_err());
        let r = compute_ranked_lists(&line(), 2).unwrap();
        assert!(build_reciprocal_graph(&r, 3).is_err());
    }

    #[test]
    fn line_reciprocal_graph() {
        let r = compute_ranked_lists(&line(), 2).unwrap();
        let g = build_reciprocal_graph(&r, 2).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn saturated_k_gives_complete_graph() {
        let r = compute_ranked_lists(&line(), 3).unwrap();
        let g = build_reciprocal_graph(&r, 3).unwrap();
        assert_eq!(g.num_edges(), 6);
    }

    #[test]
    fn propagator_shapes() {
        let empty = NeighborGraph::from_edges(3, 1, []).unwrap();
        assert_eq!(to_propagator_with_self_loops(&empty), SparsePropagator::identity(3));

        let single = NeighborGraph::from_edges(2, 1, [(1, 0)]).unwrap();
        let d = to_propagator_with_self_loops(&single).to_dense();
        assert!(d.as_slice().iter().all(|&v| v == 1.0));

        let tri = NeighborGraph::from_edges(3, 2, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let p = to_propagator_with_self_loops(&tri);
        assert_eq!(p.nnz(), 9);
        assert!(p.to_dense().as_slice().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn from_edges_rejects_self_pairs() {
        assert!(NeighborGraph::from_edges(2, 1, [(1, 1)]).is_err());
        assert!(NeighborGraph::from_edges(2, 1, [(0, 2)]).is_err());
    }
}
