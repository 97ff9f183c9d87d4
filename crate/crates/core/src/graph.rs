//! Directed graph over two partitioned datasets plus the formal
//! graph-sample contract.
//!
//! A graph sample S = (V_S, E_S) of G = (V, E) must satisfy V_S ⊆ V,
//! E_S ⊆ E, and every sampled edge's endpoints must be in V_S. By
//! convention every sampler also removes zero-degree vertices from its
//! output.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::dataflow::{ExecutionContext, PartitionedDataset};
use crate::error::{Error, Result};

/// A vertex: a 64-bit id plus the two boolean flags the sampling dataflows
/// mark (all false by default).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VertexRecord {
    pub id: u64,
    pub sampled: bool,
    pub visited: bool,
}

impl VertexRecord {
    pub fn new(id: u64) -> Self {
        Self {
            id,
            sampled: false,
            visited: false,
        }
    }
}

/// A directed edge with its own unique id. Self-loops and parallel edges are
/// permitted; parallels are distinguished by id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeRecord {
    pub id: u64,
    pub source: u64,
    pub target: u64,
}

/// Target ratio of retained vertices (or edges), in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSize(f64);

impl SampleSize {
    pub fn new(s: f64) -> Result<Self> {
        if s.is_finite() && (0.0..=1.0).contains(&s) {
            Ok(Self(s))
        } else {
            Err(Error::SampleSizeOutOfRange(s))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Which stored degree a vertex degree dataset counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeMode {
    In,
    Out,
    Total,
}

/// A directed graph: a vertex dataset and an edge dataset sharing one
/// execution context.
#[derive(Debug, Clone)]
pub struct Graph {
    vertices: PartitionedDataset<VertexRecord>,
    edges: PartitionedDataset<EdgeRecord>,
}

impl Graph {
    /// Builds a graph and checks its invariants: vertex ids unique, every
    /// edge endpoint resolves to a vertex.
    pub fn new(
        vertices: PartitionedDataset<VertexRecord>,
        edges: PartitionedDataset<EdgeRecord>,
    ) -> Result<Self> {
        let mut seen = HashSet::with_capacity(vertices.count());
        for v in vertices.iter() {
            if !seen.insert(v.id) {
                return Err(Error::DuplicateVertexId(v.id));
            }
        }
        for e in edges.iter() {
            for endpoint in [e.source, e.target] {
                if !seen.contains(&endpoint) {
                    return Err(Error::DanglingEndpoint {
                        edge: e.id,
                        vertex: endpoint,
                    });
                }
            }
        }
        Ok(Self { vertices, edges })
    }

    /// Builds a graph whose invariants hold by construction.
    pub(crate) fn from_parts_unchecked(
        vertices: PartitionedDataset<VertexRecord>,
        edges: PartitionedDataset<EdgeRecord>,
    ) -> Self {
        Self { vertices, edges }
    }

    /// Convenience constructor from plain records.
    pub fn from_records(
        ctx: &ExecutionContext,
        vertices: Vec<VertexRecord>,
        edges: Vec<EdgeRecord>,
    ) -> Result<Self> {
        Self::new(ctx.dataset(vertices), ctx.dataset(edges))
    }

    /// Convenience constructor from raw (source, target) pairs: vertices are
    /// the distinct endpoints, edge ids follow input order.
    pub fn from_edge_pairs(ctx: &ExecutionContext, pairs: &[(u64, u64)]) -> Self {
        let mut ids: Vec<u64> = pairs.iter().flat_map(|&(s, t)| [s, t]).collect();
        ids.sort_unstable();
        ids.dedup();
        let vertices = ids.into_iter().map(VertexRecord::new).collect();
        let edges = pairs
            .iter()
            .enumerate()
            .map(|(i, &(source, target))| EdgeRecord {
                id: i as u64,
                source,
                target,
            })
            .collect();
        Self::from_parts_unchecked(ctx.dataset(vertices), ctx.dataset(edges))
    }

    pub fn empty(ctx: &ExecutionContext) -> Self {
        Self::from_parts_unchecked(ctx.dataset(Vec::new()), ctx.dataset(Vec::new()))
    }

    pub fn vertices(&self) -> &PartitionedDataset<VertexRecord> {
        &self.vertices
    }

    pub fn edges(&self) -> &PartitionedDataset<EdgeRecord> {
        &self.edges
    }

    pub fn context(&self) -> &ExecutionContext {
        self.vertices.context()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.count()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.count()
    }

    /// Distinct vertex ids in ascending order.
    pub fn sorted_vertex_ids(&self) -> Vec<u64> {
        let mut ids: Vec<u64> = self.vertices.iter().map(|v| v.id).collect();
        ids.sort_unstable();
        ids
    }

    /// The same graph redistributed under a different execution context.
    pub fn with_context(&self, ctx: &ExecutionContext) -> Self {
        Self::from_parts_unchecked(ctx.dataset(self.vertices.collect()), ctx.dataset(self.edges.collect()))
    }
}

/// Why a candidate graph is not a valid sample of the original.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SampleViolation {
    /// A sampled vertex id does not occur in the original graph.
    VertexNotInOriginal(u64),
    /// A sampled edge id does not occur in the original graph (or its
    /// endpoints differ from the original record).
    EdgeNotInOriginal(u64),
    /// A sampled edge references an endpoint missing from the sampled
    /// vertex set.
    EndpointNotSampled { edge: u64, vertex: u64 },
}

impl fmt::Display for SampleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::VertexNotInOriginal(id) => {
                write!(f, "sampled vertex {id} is not part of the original graph")
            }
            Self::EdgeNotInOriginal(id) => {
                write!(f, "sampled edge {id} is not part of the original graph")
            }
            Self::EndpointNotSampled { edge, vertex } => write!(
                f,
                "sampled edge {edge} references vertex {vertex} outside the sampled vertex set"
            ),
        }
    }
}

/// Checks the three graph-sample constraints, reporting the first violation
/// found (scanning vertices, then edges, in dataset order).
pub fn validate_sample(
    original: &Graph,
    sample: &Graph,
) -> std::result::Result<(), SampleViolation> {
    let original_vertices: HashSet<u64> = original.vertices.iter().map(|v| v.id).collect();
    let original_edges: HashMap<u64, (u64, u64)> = original
        .edges
        .iter()
        .map(|e| (e.id, (e.source, e.target)))
        .collect();
    let sample_vertices: HashSet<u64> = sample.vertices.iter().map(|v| v.id).collect();

    for v in sample.vertices.iter() {
        if !original_vertices.contains(&v.id) {
            return Err(SampleViolation::VertexNotInOriginal(v.id));
        }
    }
    for e in sample.edges.iter() {
        match original_edges.get(&e.id) {
            Some(&(s, t)) if s == e.source && t == e.target => {}
            _ => return Err(SampleViolation::EdgeNotInOriginal(e.id)),
        }
        for endpoint in [e.source, e.target] {
            if !sample_vertices.contains(&endpoint) {
                return Err(SampleViolation::EndpointNotSampled {
                    edge: e.id,
                    vertex: endpoint,
                });
            }
        }
    }
    Ok(())
}

/// Drops every vertex that is not an endpoint of some edge; edges are
/// unchanged.
pub fn remove_zero_degree(g: &Graph) -> Graph {
    let degrees = degree_dataset(g, DegreeMode::Total);
    let kept = degrees.filter(|&(_, d)| d > 0);
    let keyed_vertices = g.vertices().map(|v| (v.id, *v));
    let vertices = keyed_vertices.join(&kept, |v, _| *v);
    Graph::from_parts_unchecked(vertices, g.edges().clone())
}

/// Edges whose source and target both occur in `kept_vertices`, computed as
/// two joins (source side, then target side).
pub fn induced_edges(
    g: &Graph,
    kept_vertices: &PartitionedDataset<u64>,
) -> PartitionedDataset<EdgeRecord> {
    let kept = kept_vertices.map(|id| (*id, ()));
    let by_source = g.edges().map(|e| (e.source, *e));
    let source_kept = by_source.join(&kept, |e, _| *e);
    let by_target = source_kept.map(|e| (e.target, *e));
    by_target.join(&kept, |e, _| *e)
}

/// One (vertex id, degree) record per vertex, zero-degree vertices included.
/// `Total` counts in + out of the stored directed edges (a self-loop
/// contributes one in and one out).
pub fn degree_dataset(g: &Graph, mode: DegreeMode) -> PartitionedDataset<(u64, u64)> {
    let base = g.vertices().map(|v| (v.id, 0u64));
    let contributions = match mode {
        DegreeMode::In => base.union(&g.edges().map(|e| (e.target, 1))),
        DegreeMode::Out => base.union(&g.edges().map(|e| (e.source, 1))),
        DegreeMode::Total => base
            .union(&g.edges().map(|e| (e.source, 1)))
            .union(&g.edges().map(|e| (e.target, 1))),
    };
    contributions.reduce_by_key(|a, b| a + b)
}
