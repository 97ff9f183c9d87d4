//! Benchmark-only package; see the `benches/` directory.
//!
//! Shared helpers for the criterion targets live here so both benchmark
//! binaries build identical inputs.

use gsamp_core::io::{generate_synthetic, SyntheticSpec};
use gsamp_core::{ExecutionContext, Graph};

/// A deterministic power-law graph sized to keep iterations in the tens of
/// milliseconds.
pub fn benchmark_graph(parallelism: usize) -> Graph {
    let ctx = ExecutionContext::new(parallelism, 7).expect("valid context");
    generate_synthetic(&ctx, &SyntheticSpec::new(20_000, 100_000, 7)).expect("valid spec")
}
