//! A parallel, in-memory graph sampling toolkit.
//!
//! The crate reimplements four distributed graph sampling operators —
//! random vertex, random edge, random vertex neighborhood, and random walk —
//! on a miniature partitioned dataflow engine, together with the graph
//! metrics used to judge how well a sample preserves the original graph's
//! structure.
//!
//! ```
//! use gsamp_core::{ExecutionContext, Graph, SampleSize};
//! use gsamp_core::sampling::random_edge_sample;
//!
//! let ctx = ExecutionContext::new(2, 42).unwrap();
//! let g = Graph::from_edge_pairs(&ctx, &[(0, 1), (1, 2), (2, 0)]);
//! let sample = random_edge_sample(&g, SampleSize::new(1.0).unwrap(), 7);
//! assert_eq!(sample.edge_count(), 3);
//! ```
//!
//! Everything randomized is a pure function of the master seed and stable
//! element identity, so any sampling job produces identical output at every
//! parallelism degree.

pub mod dataflow;
pub mod error;
pub mod graph;
pub mod hash;
pub mod io;
pub mod metrics;
pub mod naive;
pub mod pregel;
pub mod sampling;
pub mod walk;

pub use dataflow::{ExecutionContext, PartitionedDataset};
pub use error::{Error, Result};
pub use graph::{EdgeRecord, Graph, SampleSize, VertexRecord};
pub use metrics::{LocalCcMode, MetricsOptions, MetricsReport};
pub use sampling::{keep_decision, Algorithm, NeighborhoodDirection, SampleConfig};
pub use walk::{WalkParams, WalkStats};
