//! A minimal bulk-synchronous-parallel vertex-centric engine: superstep
//! loop, message shuffle, aggregators, and halting.
//!
//! Within a superstep, vertex compute calls run concurrently across
//! partitions; the barrier is a full join of all partition tasks plus the
//! aggregator merge. A message produced in superstep k is only visible in
//! superstep k + 1. Inboxes are normalized (sorted by sender id, then by
//! send order) before compute runs, so results are independent of the
//! physical shuffle; messages may target any vertex in the graph, not just
//! neighbors.

use std::collections::HashMap;

use crate::dataflow::ExecutionContext;
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexRecord};

/// An outgoing edge as seen from its source vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutEdge {
    pub edge_id: u64,
    pub target: u64,
}

/// A message delivered to a vertex, tagged with its sender.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inbound<M> {
    pub sender: u64,
    pub payload: M,
}

/// A message injected before the first superstep.
#[derive(Debug, Clone)]
pub struct Envelope<M> {
    pub sender: u64,
    pub target: u64,
    pub payload: M,
}

/// How an aggregator combines per-vertex contributions. All variants are
/// associative and commutative, so the combined value is independent of
/// partition order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggOp {
    Sum,
    Min,
    Max,
}

impl AggOp {
    fn identity(self) -> i64 {
        match self {
            Self::Sum => 0,
            Self::Min => i64::MAX,
            Self::Max => i64::MIN,
        }
    }

    fn combine(self, a: i64, b: i64) -> i64 {
        match self {
            Self::Sum => a + b,
            Self::Min => a.min(b),
            Self::Max => a.max(b),
        }
    }
}

/// A named global aggregator.
#[derive(Debug, Clone, Copy)]
pub struct AggregatorDef {
    pub name: &'static str,
    pub op: AggOp,
}

/// Aggregator values after one superstep (identities before the first).
#[derive(Debug, Clone)]
pub struct Aggregates {
    values: Vec<(&'static str, i64)>,
}

impl Aggregates {
    fn identities(defs: &[AggregatorDef]) -> Self {
        Self {
            values: defs.iter().map(|d| (d.name, d.op.identity())).collect(),
        }
    }

    /// Value of a registered aggregator; panics on an unknown name.
    pub fn get(&self, name: &str) -> i64 {
        self.values
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, v)| *v)
            .unwrap_or_else(|| panic!("unknown aggregator {name:?}"))
    }
}

/// The per-vertex view handed to the compute function.
pub struct BspVertex<'a, S, M> {
    pub id: u64,
    pub out_edges: &'a [OutEdge],
    pub in_neighbors: &'a [u64],
    pub state: &'a mut S,
    superstep: usize,
    active: &'a mut bool,
    outbox: &'a mut Vec<RoutedMessage<M>>,
    contributions: &'a mut Vec<(&'static str, i64)>,
    seq: u32,
}

impl<S, M> BspVertex<'_, S, M> {
    /// The 1-based index of the currently executing superstep.
    pub fn superstep(&self) -> usize {
        self.superstep
    }

    /// Queues a message for delivery in the next superstep. The target may
    /// be any vertex of the graph; an unknown id fails the whole run.
    pub fn send(&mut self, target: u64, payload: M) {
        self.outbox.push(RoutedMessage {
            target,
            sender: self.id,
            seq: self.seq,
            payload,
        });
        self.seq += 1;
    }

    /// Adds to a registered aggregator for this superstep.
    pub fn contribute(&mut self, name: &'static str, amount: i64) {
        self.contributions.push((name, amount));
    }

    /// Deactivates this vertex; an incoming message reactivates it.
    pub fn vote_to_halt(&mut self) {
        *self.active = false;
    }
}

/// Final vertex states plus run statistics. `converged` is false only when
/// the superstep limit was reached before the halting condition.
#[derive(Debug)]
pub struct BspOutcome<S> {
    /// (vertex id, state) sorted by id.
    pub states: Vec<(u64, S)>,
    pub supersteps: usize,
    pub converged: bool,
}

struct RoutedMessage<M> {
    target: u64,
    sender: u64,
    seq: u32,
    payload: M,
}

/// (partition, local index) of every vertex id.
type VertexLookup = HashMap<u64, (u32, u32)>;

/// One partition's outbox and aggregator contributions for one superstep.
type SuperstepOutput<M> = (Vec<RoutedMessage<M>>, Vec<(&'static str, i64)>);

/// Per-partition raw adjacency input: (source, edge) pairs and
/// (target, source) pairs.
type AdjacencyInput = (Vec<(u64, OutEdge)>, Vec<(u64, u64)>);

/// Adjacency pairs scattered into per-partition buckets.
type ScatteredAdjacency = (Vec<Vec<(u64, OutEdge)>>, Vec<Vec<(u64, u64)>>);

struct PendingMessage<M> {
    target_index: u32,
    sender: u64,
    seq: u32,
    payload: M,
}

struct Partition<S> {
    ids: Vec<u64>,
    states: Vec<S>,
    active: Vec<bool>,
    /// Sorted local indices of active vertices.
    active_list: Vec<u32>,
    out_offsets: Vec<usize>,
    out_edges: Vec<OutEdge>,
    in_offsets: Vec<usize>,
    in_neighbors: Vec<u64>,
}

/// A configured vertex-centric program over one graph.
pub struct BspProgram<'g> {
    graph: &'g Graph,
    aggregators: Vec<AggregatorDef>,
    max_supersteps: Option<usize>,
}

impl<'g> BspProgram<'g> {
    pub fn new(graph: &'g Graph) -> Self {
        Self {
            graph,
            aggregators: Vec::new(),
            max_supersteps: None,
        }
    }

    pub fn aggregator(mut self, def: AggregatorDef) -> Self {
        self.aggregators.push(def);
        self
    }

    /// Caps the number of supersteps. Defaults to 100 · |V|: iterative
    /// programs may revisit vertices, so |V| alone is not an upper bound.
    pub fn max_supersteps(mut self, n: usize) -> Self {
        self.max_supersteps = Some(n);
        self
    }

    /// Runs the program to completion.
    ///
    /// `init` produces each vertex's starting state and activity. `compute`
    /// runs once per superstep for every vertex that is active or has mail;
    /// it must be deterministic given (state, sorted inbox, superstep,
    /// master seed). `halt` is consulted after every completed superstep
    /// with that superstep's aggregator values; the run also stops when no
    /// messages are in flight and every vertex is inactive, or at the
    /// superstep cap (flagged as not converged).
    pub fn run<S, M, I, C, H>(
        self,
        init: I,
        compute: C,
        mut halt: H,
        initial_messages: Vec<Envelope<M>>,
    ) -> Result<BspOutcome<S>>
    where
        S: Send,
        M: Send,
        I: Fn(&VertexRecord) -> (S, bool) + Sync,
        C: Fn(&mut BspVertex<'_, S, M>, &[Inbound<M>]) + Sync,
        H: FnMut(&Aggregates, usize) -> bool,
    {
        let ctx = self.graph.context().clone();
        let vertex_count = self.graph.vertex_count();
        let max_supersteps = self.max_supersteps.unwrap_or(100 * vertex_count);

        let (mut partitions, lookup) = build_partitions(self.graph, &ctx, &init)?;
        let partition_count = partitions.len();

        let initial: Vec<RoutedMessage<M>> = initial_messages
            .into_iter()
            .enumerate()
            .map(|(i, e)| RoutedMessage {
                target: e.target,
                sender: e.sender,
                seq: i as u32,
                payload: e.payload,
            })
            .collect();
        let mut pending = route_messages(&ctx, partition_count, vec![initial], &lookup)?;

        let mut aggregates = Aggregates::identities(&self.aggregators);
        let mut supersteps = 0usize;
        let converged = loop {
            if halt(&aggregates, supersteps) {
                break true;
            }
            let quiescent = pending.iter().all(Vec::is_empty)
                && partitions.iter().all(|p| p.active_list.is_empty());
            if quiescent {
                break true;
            }
            if supersteps >= max_supersteps {
                break false;
            }
            supersteps += 1;

            let mail = std::mem::replace(
                &mut pending,
                (0..partition_count).map(|_| Vec::new()).collect(),
            );
            let results: Vec<SuperstepOutput<M>> = ctx
                .run_stage_zip(&mut partitions, mail, |_, partition, inbox| {
                    run_partition_superstep(partition, inbox, supersteps, &compute)
                });

            aggregates = Aggregates::identities(&self.aggregators);
            let mut outboxes = Vec::with_capacity(partition_count);
            for (outbox, contributions) in results {
                for (name, amount) in contributions {
                    let def = self
                        .aggregators
                        .iter()
                        .find(|d| d.name == name)
                        .unwrap_or_else(|| panic!("contribution to unregistered aggregator {name:?}"));
                    let slot = aggregates
                        .values
                        .iter_mut()
                        .find(|(n, _)| *n == name)
                        .expect("aggregator registered");
                    slot.1 = def.op.combine(slot.1, amount);
                }
                outboxes.push(outbox);
            }
            pending = route_messages(&ctx, partition_count, outboxes, &lookup)?;
        };

        let mut states: Vec<(u64, S)> = partitions
            .into_iter()
            .flat_map(|p| p.ids.into_iter().zip(p.states))
            .collect();
        states.sort_unstable_by_key(|(id, _)| *id);
        Ok(BspOutcome {
            states,
            supersteps,
            converged,
        })
    }
}

/// Splits vertices and adjacency by vertex id modulo parallelism and runs
/// `init` on every vertex.
fn build_partitions<S, I>(
    graph: &Graph,
    ctx: &ExecutionContext,
    init: &I,
) -> Result<(Vec<Partition<S>>, VertexLookup)>
where
    S: Send,
    I: Fn(&VertexRecord) -> (S, bool) + Sync,
{
    let p = ctx.parallelism();
    let mut records = graph.vertices().collect();
    records.sort_unstable_by_key(|v: &VertexRecord| v.id);
    for pair in records.windows(2) {
        if pair[0].id == pair[1].id {
            return Err(Error::DuplicateVertexId(pair[0].id));
        }
    }

    let mut per_partition: Vec<Vec<VertexRecord>> = (0..p).map(|_| Vec::new()).collect();
    let mut lookup = HashMap::with_capacity(records.len());
    for v in records {
        let part = (v.id % p as u64) as u32;
        let index = per_partition[part as usize].len() as u32;
        lookup.insert(v.id, (part, index));
        per_partition[part as usize].push(v);
    }

    // Scatter edges to the partition of their source (for out-edges) and of
    // their target (for in-neighbors), in parallel over dataset partitions.
    let edge_parts = graph.edges().partition_count();
    let scattered: Vec<ScatteredAdjacency> = ctx.run_stage(edge_parts, |i| {
        let mut by_source: Vec<Vec<(u64, OutEdge)>> = (0..p).map(|_| Vec::new()).collect();
        let mut by_target: Vec<Vec<(u64, u64)>> = (0..p).map(|_| Vec::new()).collect();
        for e in graph.edges().partition(i) {
            by_source[(e.source % p as u64) as usize].push((
                e.source,
                OutEdge {
                    edge_id: e.id,
                    target: e.target,
                },
            ));
            by_target[(e.target % p as u64) as usize].push((e.target, e.source));
        }
        (by_source, by_target)
    });

    let mut outs: Vec<Vec<(u64, OutEdge)>> = (0..p).map(|_| Vec::new()).collect();
    let mut ins: Vec<Vec<(u64, u64)>> = (0..p).map(|_| Vec::new()).collect();
    for (mut by_source, mut by_target) in scattered {
        for t in 0..p {
            outs[t].append(&mut by_source[t]);
            ins[t].append(&mut by_target[t]);
        }
    }

    let mut inputs: Vec<AdjacencyInput> = outs.into_iter().zip(ins).collect();
    let assembled: Vec<Result<Partition<S>>> = {
        let per_partition = &per_partition;
        ctx.run_stage_zip(&mut inputs, vec![(); p], |i, input, ()| {
            let out = std::mem::take(&mut input.0);
            let into = std::mem::take(&mut input.1);
            assemble_partition(&per_partition[i], out, into, init)
        })
    };

    let mut partitions = Vec::with_capacity(p);
    for part in assembled {
        partitions.push(part?);
    }
    Ok((partitions, lookup))
}

fn assemble_partition<S, I>(
    records: &[VertexRecord],
    mut out: Vec<(u64, OutEdge)>,
    mut into: Vec<(u64, u64)>,
    init: &I,
) -> Result<Partition<S>>
where
    I: Fn(&VertexRecord) -> (S, bool),
{
    let n = records.len();
    let ids: Vec<u64> = records.iter().map(|v| v.id).collect();

    // Out-edges sorted by edge id within each vertex.
    out.sort_unstable_by_key(|(source, e)| (*source, e.edge_id));
    let mut out_offsets = Vec::with_capacity(n + 1);
    let mut out_edges = Vec::with_capacity(out.len());
    let mut cursor = 0usize;
    out_offsets.push(0);
    for &id in &ids {
        if cursor < out.len() && out[cursor].0 < id {
            // Source id hashed to this partition but absent from it.
            return Err(Error::DanglingEndpoint {
                edge: out[cursor].1.edge_id,
                vertex: out[cursor].0,
            });
        }
        while cursor < out.len() && out[cursor].0 == id {
            out_edges.push(out[cursor].1);
            cursor += 1;
        }
        out_offsets.push(out_edges.len());
    }
    if cursor < out.len() {
        return Err(Error::DanglingEndpoint {
            edge: out[cursor].1.edge_id,
            vertex: out[cursor].0,
        });
    }

    // Distinct in-neighbors sorted by id within each vertex.
    into.sort_unstable();
    let mut in_offsets = Vec::with_capacity(n + 1);
    let mut in_neighbors = Vec::new();
    let mut cursor = 0usize;
    in_offsets.push(0);
    for &id in &ids {
        if cursor < into.len() && into[cursor].0 < id {
            return Err(Error::DanglingEndpoint {
                edge: u64::MAX,
                vertex: into[cursor].0,
            });
        }
        let mut last = None;
        while cursor < into.len() && into[cursor].0 == id {
            let source = into[cursor].1;
            if last != Some(source) {
                in_neighbors.push(source);
                last = Some(source);
            }
            cursor += 1;
        }
        in_offsets.push(in_neighbors.len());
    }
    if cursor < into.len() {
        return Err(Error::DanglingEndpoint {
            edge: u64::MAX,
            vertex: into[cursor].0,
        });
    }

    let mut states = Vec::with_capacity(n);
    let mut active = Vec::with_capacity(n);
    let mut active_list = Vec::new();
    for (i, record) in records.iter().enumerate() {
        let (state, is_active) = init(record);
        states.push(state);
        active.push(is_active);
        if is_active {
            active_list.push(i as u32);
        }
    }

    Ok(Partition {
        ids,
        states,
        active,
        active_list,
        out_offsets,
        out_edges,
        in_offsets,
        in_neighbors,
    })
}

/// Scatters outboxes to their target partitions. Returns one unsorted
/// mailbox per partition; per-vertex ordering is normalized at compute time.
fn route_messages<M: Send>(
    ctx: &ExecutionContext,
    partition_count: usize,
    outboxes: Vec<Vec<RoutedMessage<M>>>,
    lookup: &VertexLookup,
) -> Result<Vec<Vec<PendingMessage<M>>>> {
    let mut slots: Vec<Vec<RoutedMessage<M>>> = outboxes;
    let n = slots.len();
    let scattered: Vec<Result<Vec<Vec<PendingMessage<M>>>>> =
        ctx.run_stage_zip(&mut slots, vec![(); n], |_, outbox, ()| {
            let outbox = std::mem::take(outbox);
            let mut buckets: Vec<Vec<PendingMessage<M>>> =
                (0..partition_count).map(|_| Vec::new()).collect();
            for message in outbox {
                let &(part, index) = lookup
                    .get(&message.target)
                    .ok_or(Error::UnknownMessageTarget(message.target))?;
                buckets[part as usize].push(PendingMessage {
                    target_index: index,
                    sender: message.sender,
                    seq: message.seq,
                    payload: message.payload,
                });
            }
            Ok(buckets)
        });

    let mut pending: Vec<Vec<PendingMessage<M>>> =
        (0..partition_count).map(|_| Vec::new()).collect();
    for buckets in scattered {
        for (t, mut bucket) in buckets?.into_iter().enumerate() {
            pending[t].append(&mut bucket);
        }
    }
    Ok(pending)
}

/// One partition's share of a superstep: normalize the inbox, invoke compute
/// on every vertex that is active or has mail, and collect its outbox and
/// aggregator contributions.
fn run_partition_superstep<S, M, C>(
    partition: &mut Partition<S>,
    mut mail: Vec<PendingMessage<M>>,
    superstep: usize,
    compute: &C,
) -> (Vec<RoutedMessage<M>>, Vec<(&'static str, i64)>)
where
    C: Fn(&mut BspVertex<'_, S, M>, &[Inbound<M>]),
{
    mail.sort_unstable_by_key(|m| (m.target_index, m.sender, m.seq));
    let mut inbox_targets = Vec::with_capacity(mail.len());
    let mut inbox = Vec::with_capacity(mail.len());
    for m in mail {
        inbox_targets.push(m.target_index);
        inbox.push(Inbound {
            sender: m.sender,
            payload: m.payload,
        });
    }

    // Work list: previously active vertices plus mail recipients, ascending.
    let mut worklist: Vec<u32> = Vec::with_capacity(partition.active_list.len());
    {
        let mut a = partition.active_list.iter().copied().peekable();
        let mut i = 0usize;
        loop {
            let next_mail = loop {
                match inbox_targets.get(i) {
                    Some(&t) if worklist.last() == Some(&t) => i += 1,
                    other => break other.copied(),
                }
            };
            match (a.peek().copied(), next_mail) {
                (Some(x), Some(y)) => {
                    if x <= y {
                        worklist.push(x);
                        a.next();
                        if x == y {
                            i += 1;
                        }
                    } else {
                        worklist.push(y);
                        i += 1;
                    }
                }
                (Some(x), None) => {
                    worklist.push(x);
                    a.next();
                }
                (None, Some(y)) => {
                    worklist.push(y);
                    i += 1;
                }
                (None, None) => break,
            }
        }
    }

    let Partition {
        ids,
        states,
        active,
        active_list,
        out_offsets,
        out_edges,
        in_offsets,
        in_neighbors,
    } = partition;

    let mut outbox = Vec::new();
    let mut contributions = Vec::new();
    let mut next_active = Vec::with_capacity(worklist.len());
    let mut cursor = 0usize;
    for &index in &worklist {
        let i = index as usize;
        let start = cursor;
        while cursor < inbox_targets.len() && inbox_targets[cursor] == index {
            cursor += 1;
        }
        // A delivered message reactivates its target.
        active[i] = true;
        let mut scope = BspVertex {
            id: ids[i],
            out_edges: &out_edges[out_offsets[i]..out_offsets[i + 1]],
            in_neighbors: &in_neighbors[in_offsets[i]..in_offsets[i + 1]],
            state: &mut states[i],
            superstep,
            active: &mut active[i],
            outbox: &mut outbox,
            contributions: &mut contributions,
            seq: 0,
        };
        compute(&mut scope, &inbox[start..cursor]);
        if active[i] {
            next_active.push(index);
        }
    }
    *active_list = next_active;
    (outbox, contributions)
}
