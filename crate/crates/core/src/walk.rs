//! Random walk (RW) sampling: a multi-walker vertex-centric walk with
//! per-vertex traversed-edge memory, a jump probability, and a global
//! visited-count convergence check.
//!
//! Start vertices are chosen at job start and take their first step
//! immediately; from then on each walker lives in exactly one message per
//! superstep. A vertex receiving a walker marks itself visited and forwards
//! the walker in the same superstep: with probability `j`, or when no
//! untraversed outgoing edge remains, the walker jumps to a uniformly random
//! other vertex; otherwise it follows a uniformly random untraversed
//! outgoing edge and marks that edge traversed. Edge memory lives on the
//! vertex and is shared by all walkers; simultaneous walkers at one vertex
//! resolve their picks in walker-id order, so the second walker can never
//! re-traverse the first one's pick. The iteration halts once the visited
//! count reaches ceil(s · |V|).

use std::collections::HashMap;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{induced_edges, remove_zero_degree, Graph, SampleSize, VertexRecord};
use crate::hash::{
    hash_words, unit_half_open, uniform_index, STREAM_EDGE_PICK, STREAM_JUMP_DRAW,
    STREAM_JUMP_TARGET,
};
use crate::pregel::{AggOp, AggregatorDef, BspProgram, Envelope, OutEdge};

const STREAM_START_SELECT: u64 = 0x53545254;
const NEWLY_VISITED: &str = "newly_visited";

/// Parameters of one random walk sampling job.
#[derive(Debug, Clone, Copy)]
pub struct WalkParams {
    pub sample_size: SampleSize,
    pub walkers: usize,
    pub jump_probability: f64,
    pub seed: u64,
}

/// Observed run statistics: the visited count is taken at halt, before
/// zero-degree removal. At a non-error halt with target ≥ 1 it lies in
/// [target, target + walkers − 1]: each superstep adds at most one new
/// visit per walker and the convergence check runs once per superstep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkStats {
    pub visited: usize,
    pub supersteps: usize,
    pub target: usize,
}

/// Per-vertex walk state: the visited flag never reverts once set, and the
/// traversed set only grows (it holds ids of this vertex's outgoing edges).
#[derive(Debug, Clone, Default)]
pub struct WalkVertexState {
    pub visited: bool,
    pub traversed_out_edges: Vec<u64>,
}

/// How a walker moved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkKind {
    /// Along an untraversed outgoing edge to a neighbor.
    Walk,
    /// To a uniformly random vertex other than the current one.
    Jump,
}

/// One walker in flight; exactly one such message exists per live walker
/// per superstep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkerMessage {
    pub walker: u32,
    pub kind: WalkKind,
}

/// Picks the destination a walker jumps to: uniform over all vertices
/// except the current one. With a single-vertex graph the walker stays put.
pub fn jump_target(
    seed: u64,
    walker: u32,
    superstep: usize,
    current: u64,
    sorted_ids: &[u64],
) -> u64 {
    let n = sorted_ids.len();
    if n <= 1 {
        return current;
    }
    let rank = sorted_ids
        .binary_search(&current)
        .expect("current vertex is part of the graph");
    let r = uniform_index(
        hash_words(seed, &[STREAM_JUMP_TARGET, walker as u64, superstep as u64]),
        n - 1,
    );
    let index = if r >= rank { r + 1 } else { r };
    sorted_ids[index]
}

/// Walk-wide constants consulted by every step decision.
struct StepContext<'a> {
    seed: u64,
    jump_probability: f64,
    sorted_ids: &'a [u64],
}

/// One walker step at one vertex. Mutates the vertex's traversed-edge set
/// when the walker follows an edge.
fn step_decision(
    ctx: &StepContext<'_>,
    walker: u32,
    superstep: usize,
    vertex: u64,
    out_edges: &[OutEdge],
    traversed: &mut Vec<u64>,
) -> (u64, WalkKind) {
    let draw = unit_half_open(hash_words(
        ctx.seed,
        &[STREAM_JUMP_DRAW, walker as u64, superstep as u64],
    ));
    // Candidates inherit the edge-id ordering of `out_edges`.
    let candidates: Vec<&OutEdge> = out_edges
        .iter()
        .filter(|e| traversed.binary_search(&e.edge_id).is_err())
        .collect();
    if draw < ctx.jump_probability || candidates.is_empty() {
        (
            jump_target(ctx.seed, walker, superstep, vertex, ctx.sorted_ids),
            WalkKind::Jump,
        )
    } else {
        let pick = uniform_index(
            hash_words(ctx.seed, &[STREAM_EDGE_PICK, walker as u64, superstep as u64]),
            candidates.len(),
        );
        let edge = candidates[pick];
        let slot = traversed
            .binary_search(&edge.edge_id)
            .expect_err("candidate edges are untraversed");
        traversed.insert(slot, edge.edge_id);
        (edge.target, WalkKind::Walk)
    }
}

/// Runs the walk and returns the sampled graph.
pub fn random_walk_sample(g: &Graph, params: &WalkParams) -> Result<Graph> {
    random_walk_sample_detailed(g, params).map(|(graph, _)| graph)
}

/// Runs the walk and additionally reports visited count, superstep count,
/// and the convergence target.
pub fn random_walk_sample_detailed(g: &Graph, params: &WalkParams) -> Result<(Graph, WalkStats)> {
    if params.walkers == 0 {
        return Err(Error::ZeroWalkers);
    }
    if !params.jump_probability.is_finite() || !(0.0..=1.0).contains(&params.jump_probability) {
        return Err(Error::JumpProbabilityOutOfRange(params.jump_probability));
    }
    let n = g.vertex_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if params.walkers > n {
        return Err(Error::TooManyWalkers {
            walkers: params.walkers,
            vertices: n,
        });
    }

    let ids = Arc::new(g.sorted_vertex_ids());
    let target = (params.sample_size.value() * n as f64).ceil() as usize;
    let seed = params.seed;
    let jump_probability = params.jump_probability;

    // Distinct start vertices, uniform without replacement; walker w starts
    // at the w-th draw. Each start is marked visited up front.
    let mut rng = ChaCha8Rng::seed_from_u64(hash_words(seed, &[STREAM_START_SELECT]));
    let starts: Vec<u64> = rand::seq::index::sample(&mut rng, n, params.walkers)
        .iter()
        .map(|i| ids[i])
        .collect();

    if starts.len() >= target {
        let mut visited: Vec<u64> = starts.clone();
        visited.sort_unstable();
        let stats = WalkStats {
            visited: visited.len(),
            supersteps: 0,
            target,
        };
        return Ok((assemble_output(g, visited), stats));
    }

    // First step of every walker, taken at start-vertex selection time so
    // superstep 1 already delivers an arrival.
    let mut start_out: HashMap<u64, Vec<OutEdge>> = starts
        .iter()
        .map(|&v| (v, Vec::new()))
        .collect();
    for e in g.edges().iter() {
        if let Some(list) = start_out.get_mut(&e.source) {
            list.push(OutEdge {
                edge_id: e.id,
                target: e.target,
            });
        }
    }
    for list in start_out.values_mut() {
        list.sort_unstable_by_key(|e| e.edge_id);
    }

    let mut start_traversed: HashMap<u64, Vec<u64>> =
        starts.iter().map(|&v| (v, Vec::new())).collect();
    let mut initial = Vec::with_capacity(starts.len());
    let step_ctx = StepContext {
        seed,
        jump_probability,
        sorted_ids: &ids,
    };
    for (w, &v) in starts.iter().enumerate() {
        let out = &start_out[&v];
        let traversed = start_traversed.get_mut(&v).expect("start state exists");
        let (dest, kind) = step_decision(&step_ctx, w as u32, 0, v, out, traversed);
        initial.push(Envelope {
            sender: v,
            target: dest,
            payload: WalkerMessage {
                walker: w as u32,
                kind,
            },
        });
    }

    let init = |v: &VertexRecord| match start_traversed.get(&v.id) {
        Some(traversed) => (
            WalkVertexState {
                visited: true,
                traversed_out_edges: traversed.clone(),
            },
            false,
        ),
        None => (WalkVertexState::default(), false),
    };

    let compute_ids = Arc::clone(&ids);
    let compute = move |v: &mut crate::pregel::BspVertex<'_, WalkVertexState, WalkerMessage>,
                        inbox: &[crate::pregel::Inbound<WalkerMessage>]| {
        if !v.state.visited {
            v.state.visited = true;
            v.contribute(NEWLY_VISITED, 1);
        }
        let mut walkers: Vec<u32> = inbox.iter().map(|m| m.payload.walker).collect();
        walkers.sort_unstable();
        let superstep = v.superstep();
        let out_edges = v.out_edges;
        let id = v.id;
        let step_ctx = StepContext {
            seed,
            jump_probability,
            sorted_ids: &compute_ids,
        };
        for walker in walkers {
            let (dest, kind) = step_decision(
                &step_ctx,
                walker,
                superstep,
                id,
                out_edges,
                &mut v.state.traversed_out_edges,
            );
            v.send(dest, WalkerMessage { walker, kind });
        }
        v.vote_to_halt();
    };

    let mut total = starts.len();
    let halt = move |aggregates: &crate::pregel::Aggregates, _superstep: usize| {
        total += aggregates.get(NEWLY_VISITED) as usize;
        total >= target
    };

    let max_supersteps = 100 * n;
    let outcome = BspProgram::new(g)
        .aggregator(AggregatorDef {
            name: NEWLY_VISITED,
            op: AggOp::Sum,
        })
        .max_supersteps(max_supersteps)
        .run(init, compute, halt, initial)?;

    let visited: Vec<u64> = outcome
        .states
        .iter()
        .filter(|(_, s)| s.visited)
        .map(|(id, _)| *id)
        .collect();
    if !outcome.converged {
        return Err(Error::WalkNotConverged {
            max_supersteps,
            visited: visited.len(),
        });
    }
    let stats = WalkStats {
        visited: visited.len(),
        supersteps: outcome.supersteps,
        target,
    };
    Ok((assemble_output(g, visited), stats))
}

/// Visited vertices plus the edges induced among them, minus zero-degree
/// vertices.
fn assemble_output(g: &Graph, visited: Vec<u64>) -> Graph {
    let ctx = g.context();
    let records: Vec<VertexRecord> = visited
        .iter()
        .map(|&id| VertexRecord {
            id,
            sampled: false,
            visited: true,
        })
        .collect();
    let kept = ctx.dataset(visited);
    let edges = induced_edges(g, &kept);
    remove_zero_degree(&Graph::from_parts_unchecked(ctx.dataset(records), edges))
}
