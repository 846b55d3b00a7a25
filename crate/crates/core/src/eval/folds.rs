use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Result};

/// Node-to-fold assignment from a seeded permutation cut into contiguous blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub n: usize,
    pub fold_count: usize,
    pub seed: u64,
    pub assignment: Vec<usize>,
}

/// Fold `f` receives permutation positions `[f*n/F, (f+1)*n/F)`, so fold
/// sizes differ by at most one and the larger folds come last.
pub fn make_folds(n: usize, fold_count: usize, seed: u64) -> Result<FoldPlan> {
    if fold_count < 2 {
        return arg_err(format!("need at least 2 folds, got {fold_count}"));
    }
    if n < fold_count {
        return arg_err(format!("{n} nodes cannot fill {fold_count} folds"));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut assignment = vec![0; n];
    for f in 0..fold_count {
        let (lo, hi) = (f * n / fold_count, (f + 1) * n / fold_count);
        for &node in &perm[lo..hi] {
            assignment[node] = f;
        }
    }
    Ok(FoldPlan {
        n,
        fold_count,
        seed,
        assignment,
    })
}

impl FoldPlan {
    /// Sorted members of fold `f`.
    pub fn members(&self, f: usize) -> Vec<usize> {
        (0..self.n).filter(|&i| self.assignment[i] == f).collect()
    }

    /// Sorted nodes outside fold `f`.
    pub fn complement(&self, f: usize) -> Vec<usize> {
        (0..self.n).filter(|&i| self.assignment[i] != f).collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.fold_count];
        for &f in &self.assignment {
            s[f] += 1;
        }
        s
    }
}

pub(crate) const EXECUTION_STREAM: u64 = 0;
pub(crate) const FOLD_STREAM: u64 = 1;
pub(crate) const INIT_STREAM: u64 = 2;
pub(crate) const DROPOUT_STREAM: u64 = 3;

/// The `index`-th 64-bit word of ChaCha stream `stream` keyed by `seed`.
pub(crate) fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(u128::from(index) * 2);
    rng.next_u64()
}
