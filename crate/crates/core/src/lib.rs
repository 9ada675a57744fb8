//! Hierarchy-aware road-network modeling.
//!
//! This crate builds optimal hierarchical abstractions of weighted graphs by
//! structural-entropy minimization, derives multi-level attention masks and
//! cross-level correlation scores from the resulting encoding trees, and
//! runs a forward-only spatiotemporal transformer whose attention is shaped
//! by those artifacts.
//!
//! The pipeline, end to end:
//!
//! 1. [`graph`] — weighted sensor graphs, CSV interchange;
//! 2. [`tree`] — encoding trees, structural entropy, the greedy minimizer
//!    and exhaustive small-graph oracles;
//! 3. [`hier`] — per-level attention masks and hierarchical relative scores;
//! 4. [`spectral`] — normalized Laplacian eigendecomposition and the graph
//!    positional encodings built from it;
//! 5. [`kernels`] — multi-filter temporal convolutions and multi-hop graph
//!    aggregation that lift raw series into model tokens;
//! 6. [`model`] — masked multi-head attention and the full forward pass;
//! 7. [`arrayio`] / [`synth`] — binary tensor interchange and synthetic
//!    fixtures.
//!
//! Heavy inner loops are data-parallel via rayon when the `parallel`
//! feature (on by default) is enabled; every parallel routine has a
//! sequential twin and produces bit-identical results.

pub mod arrayio;
pub mod error;
pub mod graph;
pub mod hier;
pub mod kernels;
pub mod model;
pub mod spectral;
pub mod synth;
pub mod tree;
pub mod weights;

pub use error::{Error, Result};
pub use graph::{Graph, GraphFormat};
pub use kernels::SeriesWindow;
pub use tree::EncodingTree;
pub use weights::{ModelConfig, ModelWeights};
