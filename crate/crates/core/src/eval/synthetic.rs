use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{arg_err, Result};
use crate::tensor::DenseMatrix;

/// Isotropic Gaussian blobs, one per class, listed class by class.
///
/// Class `i` is centered at `separation * (1 + i / dim) * e_(i mod dim)`:
/// the first `dim` classes sit on distinct axes at distance `separation`
/// from the origin, later ones reuse the axes further out.
pub fn generate_blobs(
    classes: usize,
    per_class: usize,
    dim: usize,
    separation: f64,
    noise: f64,
    seed: u64,
) -> Result<(DenseMatrix, Vec<usize>)> {
    if classes == 0 || per_class == 0 || dim == 0 {
        return arg_err("classes, per_class and dim must all be at least 1");
    }
    if !(noise > 0.0 && noise.is_finite()) || !separation.is_finite() {
        return arg_err(format!("noise must be positive (got {noise})"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = classes * per_class;
    let mut data = Vec::with_capacity(n * dim);
    let mut labels = Vec::with_capacity(n);
    for class in 0..classes {
        let axis = class % dim;
        let radius = separation * (1 + class / dim) as f64;
        for _ in 0..per_class {
            for j in 0..dim {
                let mean = if j == axis { radius } else { 0.0 };
                let z: f64 = StandardNormal.sample(&mut rng);
                data.push(mean + noise * z);
            }
            labels.push(class);
        }
    }
    Ok((DenseMatrix::from_vec(n, dim, data)?, labels))
}
