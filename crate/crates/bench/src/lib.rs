//! Shared fixtures for the criterion benches.

use entrywise_core::simulation::{sample_instance, sample_mask, RankOneInstance};
use entrywise_core::{CompletionGraph, Mask};

/// A `rows x cols` mask with `known` uniform entries and a matching instance.
pub fn fixture(
    rows: usize,
    cols: usize,
    known: usize,
    seed: u64,
) -> (Mask, CompletionGraph, RankOneInstance) {
    let mask = sample_mask(rows, cols, known, seed).expect("known <= rows * cols");
    let graph = CompletionGraph::build(&mask);
    (mask, graph, sample_instance(rows, cols, seed))
}
