//! Shared fixtures for the criterion benchmarks.

use grande_core::eval::generate_blobs;
use grande_core::graph::{build_reciprocal_graph, compute_ranked_lists};
use grande_core::{FeatureMatrix, NeighborGraph};

/// Blob features with `classes * per_class` points and their reciprocal kNN graph.
pub fn blob_graph(
    classes: usize,
    per_class: usize,
    dim: usize,
    k: usize,
    seed: u64,
) -> (FeatureMatrix, Vec<usize>, NeighborGraph) {
    let (x, y) = generate_blobs(classes, per_class, dim, 4.0, 1.0, seed).expect("valid blob parameters");
    let lists = compute_ranked_lists(&x, k).expect("k < n");
    let g = build_reciprocal_graph(&lists, k).expect("k <= k_max");
    (x, y, g)
}
