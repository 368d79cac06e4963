//! Shared fixtures for the benchmark targets.

use poclab_core::sampler::CloneConfiguration;
use poclab_core::{sample_poc, MultiHypergraph, SeedSpec};

pub const BENCH_SEED: u64 = 0xBE7C;

/// A mid-size cloning-model instance for peeling benchmarks.
pub fn poc_graph(n: usize, d: usize, lambda: f64) -> MultiHypergraph {
    sample_poc(n, d, lambda, SeedSpec::new(BENCH_SEED, 0))
        .expect("valid bench parameters")
        .hypergraph
}

/// A clone configuration with heights for cut-off line benchmarks.
pub fn clone_config(n: usize, d: usize, lambda: f64) -> CloneConfiguration {
    CloneConfiguration::sample_with_heights(n, d, lambda, SeedSpec::new(BENCH_SEED, 1))
        .expect("valid bench parameters")
}
