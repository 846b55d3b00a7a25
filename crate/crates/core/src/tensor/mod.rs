//! Dense and sparse linear algebra, losses and the Adam optimizer.

mod adam;
mod dense;
mod ops;
mod sparse;

pub use adam::{AdamConfig, ParameterBlock};
pub use dense::{matmul, matmul_nt, matmul_tn, DenseMatrix};
pub use ops::{
    cross_entropy_masked, dropout_apply, glorot_init, relu_backward, relu_forward, softmax_rows,
    DropoutMask,
};
pub use sparse::SparsePropagator;
