//! The non-iterative sampling operators: random vertex (RV), random edge
//! (RE), and random vertex neighborhood (RVN), each expressed as a dataflow
//! over the graph's vertex and edge datasets.
//!
//! Keep decisions are applied per element id with the sample size as a
//! probability, not as an exact quota, so each partition can decide locally.

use crate::error::Result;
use crate::graph::{
    induced_edges, remove_zero_degree, Graph, SampleSize, VertexRecord,
};
use crate::hash::{hash_words, unit_open_closed, STREAM_KEEP};
use crate::walk::{random_walk_sample, WalkParams};

/// Which incident edges qualify a neighbor for inclusion in an RVN sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeighborhoodDirection {
    Incoming,
    Outgoing,
    Both,
}

/// The four sampling operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Rv,
    Re,
    Rvn,
    Rw,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Self::Rv => "rv",
            Self::Re => "re",
            Self::Rvn => "rvn",
            Self::Rw => "rw",
        }
    }
}

/// Everything needed to run one sampling job.
#[derive(Debug, Clone, Copy)]
pub struct SampleConfig {
    pub algorithm: Algorithm,
    pub sample_size: SampleSize,
    pub seed: u64,
    /// Only consulted by RVN.
    pub direction: NeighborhoodDirection,
    /// Only consulted by RW.
    pub walkers: usize,
    /// Only consulted by RW.
    pub jump_probability: f64,
}

impl SampleConfig {
    pub fn new(algorithm: Algorithm, sample_size: SampleSize, seed: u64) -> Self {
        Self {
            algorithm,
            sample_size,
            seed,
            direction: NeighborhoodDirection::Both,
            walkers: 1,
            jump_probability: 0.1,
        }
    }
}

/// Pure per-element keep decision: true iff the hash-derived random value
/// r(element, seed) ∈ (0, 1] is at most `s`.
///
/// The open lower bound makes both boundaries exact: s = 0 keeps nothing and
/// s = 1 keeps everything. For a fixed element the value r never changes, so
/// the kept set grows monotonically with s.
pub fn keep_decision(element_id: u64, seed: u64, s: SampleSize) -> bool {
    unit_open_closed(hash_words(seed, &[STREAM_KEEP, element_id])) <= s.value()
}

/// Random vertex sampling: filter the vertex dataset by the keep decision,
/// induce the edges with both endpoints kept, then drop zero-degree
/// vertices.
pub fn random_vertex_sample(g: &Graph, s: SampleSize, seed: u64) -> Graph {
    let kept_vertices = g.vertices().filter(|v| keep_decision(v.id, seed, s));
    let kept_ids = kept_vertices.map(|v| v.id);
    let edges = induced_edges(g, &kept_ids);
    remove_zero_degree(&Graph::from_parts_unchecked(kept_vertices, edges))
}

/// Random edge sampling: filter the edge dataset by the keep decision on
/// edge ids; the kept vertices are exactly the endpoints of the kept edges,
/// so no zero-degree vertex can occur.
pub fn random_edge_sample(g: &Graph, s: SampleSize, seed: u64) -> Graph {
    let kept_edges = g.edges().filter(|e| keep_decision(e.id, seed, s));
    let endpoints = kept_edges
        .map(|e| (e.source, ()))
        .union(&kept_edges.map(|e| (e.target, ())));
    let distinct = endpoints.reduce_by_key(|a, _| a);
    let vertices = distinct.map(|(id, _)| VertexRecord::new(*id));
    Graph::from_parts_unchecked(vertices, kept_edges)
}

/// Random vertex neighborhood sampling: flag vertices by the keep decision,
/// join each edge with its endpoint flags, keep the edges whose flags match
/// the direction rule, and derive the final vertices from the kept edges.
pub fn random_vertex_neighborhood_sample(
    g: &Graph,
    s: SampleSize,
    seed: u64,
    direction: NeighborhoodDirection,
) -> Graph {
    let flagged = g.vertices().map(|v| VertexRecord {
        sampled: keep_decision(v.id, seed, s),
        ..*v
    });
    let flags = flagged.map(|v| (v.id, v.sampled));

    // Two joins turn each edge into (edge, source flagged, target flagged).
    let by_source = g.edges().map(|e| (e.source, *e));
    let with_source_flag = by_source.join(&flags, |e, f| (*e, *f));
    let by_target = with_source_flag.map(|(e, sf)| (e.target, (*e, *sf)));
    let tuples = by_target.join(&flags, |(e, sf), tf| (*e, *sf, *tf));

    let kept_edges = tuples
        .filter(|&(_, source_flagged, target_flagged)| match direction {
            NeighborhoodDirection::Outgoing => source_flagged,
            NeighborhoodDirection::Incoming => target_flagged,
            NeighborhoodDirection::Both => source_flagged || target_flagged,
        })
        .map(|(e, _, _)| *e);

    let endpoints = kept_edges
        .map(|e| (e.source, ()))
        .union(&kept_edges.map(|e| (e.target, ())));
    let distinct = endpoints.reduce_by_key(|a, _| a);
    // Join back against the flagged dataset so vertices retain their flag.
    let keyed_flagged = flagged.map(|v| (v.id, *v));
    let vertices = distinct.join(&keyed_flagged, |_, v| *v);

    remove_zero_degree(&Graph::from_parts_unchecked(vertices, kept_edges))
}

/// Dispatches one sampling job according to its configuration.
pub fn sample(g: &Graph, config: &SampleConfig) -> Result<Graph> {
    match config.algorithm {
        Algorithm::Rv => Ok(random_vertex_sample(g, config.sample_size, config.seed)),
        Algorithm::Re => Ok(random_edge_sample(g, config.sample_size, config.seed)),
        Algorithm::Rvn => Ok(random_vertex_neighborhood_sample(
            g,
            config.sample_size,
            config.seed,
            config.direction,
        )),
        Algorithm::Rw => {
            let params = WalkParams {
                sample_size: config.sample_size,
                walkers: config.walkers,
                jump_probability: config.jump_probability,
                seed: config.seed,
            };
            random_walk_sample(g, &params)
        }
    }
}
