//! Antimicrobial-resistance prediction for tabular clinical cohorts.
//!
//! The crate covers the whole modelling path for per-antibiotic-family
//! resistance prediction:
//!
//! * [`data_model`]: cohort schemas, CSV ingestion, encoding, fold plans,
//!   bootstrap class balancing and synthetic cohorts.
//! * [`correlation`]: Pearson, Spearman and Cramér's V with permutation
//!   p-values and the feature × family association report.
//! * [`forest`]: Gini random forest with out-of-bag permutation importance.
//! * [`neuralnet`]: dense and 1-D convolutional networks trained by
//!   backpropagation.
//! * [`evaluation`]: recall, precision, F-β, rank AUC and the
//!   cross-validation harness.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`). The aliases
//! below fix the scalar to `f64`, which is what the pipeline uses.

pub mod correlation;
pub mod data_model;
pub mod evaluation;
pub mod forest;
pub mod matrix;
pub mod model;
pub mod neuralnet;
pub mod scalar;
pub mod seed;

pub use scalar::Scalar;

/// Row-major `f64` matrix.
pub type Matrix = matrix::Matrix<f64>;
/// `f64` random forest.
pub type Forest = forest::Forest<f64>;
/// `f64` decision tree node.
pub type TreeNode = forest::TreeNode<f64>;
/// `f64` neural network.
pub type Network = neuralnet::Network<f64>;
/// `f64` gradients of a [`Network`].
pub type Gradients = neuralnet::Gradients<f64>;
/// `f64` contingency-table statistics input.
pub type ContingencyTable = correlation::ContingencyTable;
