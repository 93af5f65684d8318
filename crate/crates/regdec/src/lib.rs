//! Regular decomposition of graph distance matrices.
//!
//! This crate partitions the nodes of a large sparse graph into `k` groups so
//! that, seen from every reference node, the hop distances to the members of a
//! group are nearly constant. The fit minimizes a Poisson negative
//! log-likelihood over the observed distance matrix and classifies any node
//! outside the fitted target set in constant time per node.
//!
//! The pieces:
//!
//! * [`graph`] — edge-list ingestion, connected components, BFS distances.
//! * [`distance`] — reference-by-target hop-count matrices.
//! * [`generate`] — seeded stochastic block model, planted partition, and
//!   preferential attachment generators with ground-truth labels.
//! * [`sample`] — uniform and betweenness-biased reference-node selection.
//! * [`rd`] — the decomposition itself: cost, local updates, multi-restart
//!   search, out-of-sample classification, and knee-point model selection.
//! * [`partition`] — labelings, misclassification scoring, neighbor expansion.
//! * [`theory`] — closed-form spectral predictions for the two-block planted
//!   partition model (eigenvalues, expected distances, detectability).
//!
//! Numeric routines are generic over the scalar type through [`scalar::Real`];
//! the aliases below fix the common concrete choices.

pub mod distance;
pub mod error;
pub mod generate;
pub mod graph;
pub mod partition;
pub mod rd;
pub mod rng;
pub mod sample;
pub mod scalar;
pub mod theory;

pub use distance::DistanceMatrix;
pub use error::{Error, Result};
pub use graph::{Graph, NodeId, UNREACHABLE};
pub use partition::Labeling;
pub use rd::{MeanMatrix, RdConfig, RdModel};
pub use scalar::Real;
pub use theory::SpectralQuantities;

/// [`rd::RdConfig`] with `f64` scalars.
pub type RdConfig64 = rd::RdConfig<f64>;
/// [`rd::RdConfig`] with `f32` scalars.
pub type RdConfig32 = rd::RdConfig<f32>;
/// [`rd::RdModel`] with `f64` scalars.
pub type RdModel64 = rd::RdModel<f64>;
/// [`rd::RdModel`] with `f32` scalars.
pub type RdModel32 = rd::RdModel<f32>;
/// [`rd::MeanMatrix`] with `f64` scalars.
pub type MeanMatrix64 = rd::MeanMatrix<f64>;
/// [`rd::MeanMatrix`] with `f32` scalars.
pub type MeanMatrix32 = rd::MeanMatrix<f32>;
/// [`theory::SpectralQuantities`] with `f64` scalars.
pub type SpectralQuantities64 = theory::SpectralQuantities<f64>;
/// [`theory::SpectralQuantities`] with `f32` scalars.
pub type SpectralQuantities32 = theory::SpectralQuantities<f32>;
