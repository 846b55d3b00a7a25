mod common;

use grande_core::degree::{
    compute_edge_distances, degree_centrality, grande_degrees, neighborhood_penalty, normalize_adjacency,
};
use grande_core::eval::{make_folds, mean_std};
use grande_core::graph::{build_reciprocal_graph, compute_ranked_lists, to_propagator_with_self_loops};
use grande_core::io::parse_features;
use grande_core::tensor::{softmax_rows, AdamConfig, ParameterBlock};
use grande_core::{DenseMatrix, NeighborGraph};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

fn graph_and_features(seed: u64, n: usize, dim: usize, p: f64) -> (NeighborGraph, DenseMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_graph(n, p, &mut rng);
    (g, to_dense(&random_mat(n, dim, &mut rng)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spmm_matches_dense_product(seed in any::<u64>(), n in 1usize..30, p in 0.0f64..0.5, cols in 1usize..5) {
        let (g, h) = graph_and_features(seed, n, cols, p);
        let a = to_propagator_with_self_loops(&g);
        let a = normalize_adjacency(&a, &degree_centrality(&a)).unwrap();
        let got = from_dense(&a.spmm(&h).unwrap());
        let expect = mm(&dense_sym_normalized(&g), &from_dense(&h));
        prop_assert!(max_abs_diff(&got, &expect) <= 1e-14);
    }

    #[test]
    fn normalized_propagator_is_symmetric_on_the_same_pattern(seed in any::<u64>(), n in 1usize..30, p in 0.0f64..0.5, sigma in 0.05f64..2.0) {
        let (g, h) = graph_and_features(seed, n, 3, p);
        let base = to_propagator_with_self_loops(&g);
        let a = normalize_adjacency(&base, &grande_degrees(&base, &h, sigma).unwrap()).unwrap();
        prop_assert_eq!(a.row_offsets(), base.row_offsets());
        prop_assert_eq!(a.col_indices(), base.col_indices());
        let d = from_dense(&a.to_dense());
        for i in 0..n {
            prop_assert!(a.position(i, i).is_some());
            for j in 0..n {
                prop_assert_eq!(d[i][j], d[j][i]);
            }
        }
    }

    #[test]
    fn penalty_within_bounds_and_monotone_in_sigma(seed in any::<u64>(), n in 2usize..40, p in 0.0f64..0.5) {
        let (g, h) = graph_and_features(seed, n, 4, p);
        let base = to_propagator_with_self_loops(&g);
        let table = compute_edge_distances(&base, &h).unwrap();
        let ctr = degree_centrality(&base);
        let mut prev: Option<Vec<f64>> = None;
        for sigma in [0.1, 0.2, 0.5, 1.0, 3.0] {
            let s = neighborhood_penalty(&table, &ctr, sigma).unwrap();
            for &v in &s {
                prop_assert!(v >= 1.0 && v <= (1.0 / sigma).exp());
            }
            if let Some(prev) = &prev {
                for (a, b) in prev.iter().zip(&s) {
                    prop_assert!(b <= a);
                }
            }
            prev = Some(s);
        }
    }

    #[test]
    fn degrees_follow_node_relabeling(seed in any::<u64>(), n in 2usize..25, p in 0.05f64..0.5) {
        let (g, h) = graph_and_features(seed, n, 3, p);
        let perm: Vec<usize> = (0..n).map(|i| (i * 7 + 3) % n).collect();
        let perm = if (0..n).all(|i| perm.contains(&i)) { perm } else { (0..n).rev().collect() };
        let moved = NeighborGraph::from_edges(n, 0, g.edges().iter().map(|&(i, j)| (perm[i], perm[j]))).unwrap();
        let mut hp = DenseMatrix::zeros(n, h.cols());
        for i in 0..n {
            hp.row_mut(perm[i]).copy_from_slice(h.row(i));
        }
        let d = grande_degrees(&to_propagator_with_self_loops(&g), &h, 0.3).unwrap();
        let dp = grande_degrees(&to_propagator_with_self_loops(&moved), &hp, 0.3).unwrap();
        for i in 0..n {
            prop_assert!((d.values[i] - dp.values[perm[i]]).abs() <= 1e-12);
        }
    }

    #[test]
    fn ranked_lists_equal_sorted_scan(seed in any::<u64>(), n in 2usize..40, dim in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = random_mat(n, dim, &mut rng);
        // Rounding creates ties.
        for v in x.iter_mut().flatten() {
            *v = (*v * 2.0).round();
        }
        let k = (n - 1).min(6);
        let lists = compute_ranked_lists(&to_dense(&x), k).unwrap();
        for i in 0..n {
            let ids: Vec<usize> = lists.list(i).iter().map(|nb| nb.index).collect();
            prop_assert_eq!(ids, brute_force_order(&x, i)[..k].to_vec());
        }
        let g = build_reciprocal_graph(&lists, k).unwrap();
        prop_assert_eq!(g.edges().to_vec(), brute_force_mutual(&x, k));
    }

    #[test]
    fn softmax_rows_are_distributions(seed in any::<u64>(), rows in 1usize..10, cols in 1usize..6, scale in 0.1f64..500.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut z = random_mat(rows, cols, &mut rng);
        for v in z.iter_mut().flatten() {
            *v *= scale;
        }
        let s = softmax_rows(&to_dense(&z));
        for i in 0..rows {
            let sum: f64 = s.row(i).iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12);
            prop_assert!(s.row(i).iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn adam_step_is_bounded(seed in any::<u64>(), steps in 1usize..30, lr in 1e-5f64..1e-1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = AdamConfig { lr, ..AdamConfig::default() };
        let mut p = ParameterBlock::new(to_dense(&random_mat(3, 2, &mut rng)));
        for _ in 0..steps {
            let before = p.value.clone();
            p.grad = to_dense(&random_mat(3, 2, &mut rng));
            p.grad.scale(10.0);
            p.adam_step(&cfg);
            let moved = p.value.max_abs_diff(&before).unwrap();
            prop_assert!(moved <= lr / (1.0 - cfg.beta1) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn folds_partition_nodes(n in 2usize..300, folds in 2usize..12, seed in any::<u64>()) {
        prop_assume!(n >= folds);
        let plan = make_folds(n, folds, seed).unwrap();
        let sizes = plan.sizes();
        prop_assert_eq!(sizes.iter().sum::<usize>(), n);
        let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
        prop_assert!(hi - lo <= 1);
        for f in 0..folds {
            let mut all = plan.members(f);
            all.extend(plan.complement(f));
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn mean_std_match_two_pass_formula(values in prop::collection::vec(0.0f64..1.0, 1..60)) {
        let (m, s) = mean_std(&values);
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        prop_assert!((m - mean).abs() <= 1e-15);
        prop_assert!((s - var.sqrt()).abs() <= 1e-15);
    }

    #[test]
    fn binary_features_round_trip(seed in any::<u64>(), n in 2usize..60, d in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = to_dense(&random_mat(n, d, &mut rng));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.bin");
        grande_core::io::write_features_binary(&path, &x).unwrap();
        let back = parse_features(&std::fs::read(&path).unwrap()).unwrap();
        prop_assert_eq!(back.shape(), x.shape());
        for (a, b) in back.as_slice().iter().zip(x.as_slice()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
