//! Clustering of tabular data through stochastic block models.
//!
//! Each data set is embedded as a complete weighted graph whose edge weights
//! are exponentiated negative distances. The graph is then partitioned either
//! by the classic Bernoulli block model on a thresholded copy of the graph
//! ([`sbm`]) or directly by the weighted block model with exponential edge
//! weights ([`wsbm`]). k-means and Ward clustering ([`baselines`]) serve as
//! reference methods, [`eval`] scores partitions, and [`harness`] performs
//! silhouette-driven model selection and renders result tables.

pub mod baselines;
pub mod data;
pub mod error;
pub mod eval;
pub mod harness;
pub mod partition;
pub mod sbm;
pub mod search;
pub mod simgraph;
pub mod wsbm;

pub use data::{Dataset, Scaling};
pub use error::{Error, Result};
pub use partition::{FitResult, ModelParams, Partition};
pub use simgraph::{BinaryGraph, SimilarityGraph, SimilarityMetric};
