//! Graph semi-supervised node classification with diffusion GNNs.
//!
//! The pipeline is:
//!
//! 1. [`graph::compute_ranked_lists`] finds the exact Euclidean k nearest
//!    neighbors of every node.
//! 2. [`graph::build_reciprocal_graph`] keeps only mutual neighbor pairs and
//!    [`graph::to_propagator_with_self_loops`] turns them into `A + I`.
//! 3. [`degree`] computes node degrees, either plain degree centrality or the
//!    Gaussian neighborhood degree `deg_ctr + s_neigh`, and builds the
//!    symmetric normalized propagator `D^-1/2 (A + I) D^-1/2`.
//! 4. [`models`] trains SGC or APPNP on top of that propagator, refreshing
//!    the Gaussian degrees every epoch from the current representations.
//! 5. [`eval`] runs the fold protocol and sigma sweeps.

pub mod degree;
pub mod error;
pub mod eval;
pub mod graph;
pub mod io;
pub mod models;
pub mod tensor;

pub use degree::{DegreeKind, DegreeVector, EdgeDistanceTable};
pub use error::{Error, Result};
pub use eval::{ExperimentConfig, FoldPlan, MetricsReport, SweepReport};
pub use graph::{NeighborGraph, RankedLists};
pub use models::{AppnpModel, DegreeStrategy, Model, ModelSpec, SgcModel, TrainConfig};
pub use tensor::{AdamConfig, DenseMatrix, ParameterBlock, SparsePropagator};

/// Feature tables are plain dense matrices, one row per node.
pub type FeatureMatrix = DenseMatrix;
