//! Entry-wise reconstruction, denoising and a-priori variance bounds for
//! partially observed rank-one matrices under multiplicative noise.
//!
//! The pipeline for one entry `(i, j)`:
//!
//! 1. [`CompletionGraph::build`] turns the observation mask into a bipartite graph.
//! 2. [`path_space_basis`] finds integer edge chains spanning the `i`–`j` path space.
//! 3. [`path_kernel`] and [`optimal_alpha`] weight those chains to minimize variance.
//! 4. [`estimate_entry`] evaluates the weighted chains on observed log-values;
//!    [`variance_bound`] needs only the mask and the noise variances.

pub mod error;
pub mod estimator;
pub mod mask_graph;
pub mod path_basis;
pub mod simulation;

pub use error::{Error, Result};
pub use estimator::{
    confidence_interval, estimate_entry, kernel_system, optimal_alpha, path_kernel, variance_bound,
    EntryEstimate, KernelSystem, NoiseSpec, Observations, PathKernel,
};
pub use mask_graph::{CompletionGraph, ComponentSize, Entry, Mask};
pub use path_basis::{
    fundamental_cycle, path_space_basis, path_space_basis_with_order, shortest_path_chain,
    spanning_forest, PathBasis, PathChain, SpanningForest,
};
