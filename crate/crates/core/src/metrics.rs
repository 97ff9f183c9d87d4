//! The graph-metric suite used to judge sample quality: cardinalities,
//! density, triangles, clustering coefficients, weakly connected components,
//! and degree statistics.
//!
//! Triangles, wedges, neighborhoods, and degree statistics are computed on
//! the underlying undirected simple graph (directions dropped, parallel
//! edges and self-loops collapsed); |E| and density use the stored directed
//! multigraph. Connected components run as min-label propagation on the BSP
//! engine; a sequential union-find route is provided alongside for
//! cross-checking.

use serde::{Deserialize, Serialize};

use crate::dataflow::ExecutionContext;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::pregel::{BspProgram, Envelope};

/// Denominator convention for the local clustering coefficient.
///
/// `Directed` divides the number of distinct stored directed pairs among a
/// vertex's neighbors by d·(d−1); `Undirected` divides the number of
/// distinct undirected links among them by d·(d−1)/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalCcMode {
    Directed,
    Undirected,
}

/// Report options: heavy metrics (triangles and both clustering
/// coefficients) can be skipped, leaving explicit null markers.
#[derive(Debug, Clone, Copy)]
pub struct MetricsOptions {
    pub skip_heavy: bool,
    pub local_cc_mode: LocalCcMode,
}

impl Default for MetricsOptions {
    fn default() -> Self {
        Self {
            skip_heavy: false,
            local_cc_mode: LocalCcMode::Directed,
        }
    }
}

/// A metric value or an explicit null carrying the reason it is absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetricValue<T> {
    Value(T),
    Null { null: String },
}

impl<T> MetricValue<T> {
    pub fn value(&self) -> Option<&T> {
        match self {
            Self::Value(v) => Some(v),
            Self::Null { .. } => None,
        }
    }

    pub fn null_reason(&self) -> Option<&str> {
        match self {
            Self::Value(_) => None,
            Self::Null { null } => Some(null),
        }
    }

    fn from_result(r: Result<T>) -> Self {
        match r {
            Ok(v) => Self::Value(v),
            Err(e) => Self::Null {
                null: e.to_string(),
            },
        }
    }
}

/// Undirected-simple degree statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeStats {
    pub d_avg: f64,
    pub d_min: u64,
    pub d_max: u64,
}

/// The ten quantities of the metric comparison table, serializable and
/// diffable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub vertex_count: u64,
    pub edge_count: u64,
    pub density: MetricValue<f64>,
    pub triangles: MetricValue<u64>,
    pub global_cc: MetricValue<f64>,
    pub avg_local_cc: MetricValue<f64>,
    pub wcc_count: u64,
    pub d_avg: MetricValue<f64>,
    pub d_min: MetricValue<u64>,
    pub d_max: MetricValue<u64>,
}

/// Canonical field order, shared by the text serialization and the
/// comparison table.
pub const REPORT_FIELDS: [&str; 10] = [
    "vertex_count",
    "edge_count",
    "density",
    "triangles",
    "global_cc",
    "avg_local_cc",
    "wcc_count",
    "d_avg",
    "d_min",
    "d_max",
];

/// Compact index shared by the heavy metrics: sorted vertex ids, the
/// undirected simple adjacency, and the distinct directed non-loop pairs.
pub(crate) struct CompactGraph {
    pub(crate) ids: Vec<u64>,
    pub(crate) adj_offsets: Vec<usize>,
    pub(crate) adj: Vec<u32>,
    out_offsets: Vec<usize>,
    out: Vec<u32>,
    stored_edges: u64,
}

/// Fixed chunk width for parallel per-vertex passes. Chunk boundaries must
/// not depend on the parallelism degree or float accumulation order would.
const CHUNK: usize = 4096;

impl CompactGraph {
    pub(crate) fn build(g: &Graph) -> Self {
        let ctx = g.context().clone();
        let ids = g.sorted_vertex_ids();
        let rank = |id: u64| -> u32 {
            ids.binary_search(&id)
                .expect("edge endpoint resolves to a vertex") as u32
        };

        let mut directed: Vec<(u32, u32)> = g
            .edges()
            .iter()
            .filter(|e| e.source != e.target)
            .map(|e| (rank(e.source), rank(e.target)))
            .collect();
        sort_pairs(&ctx, &mut directed);
        directed.dedup();

        let mut undirected: Vec<(u32, u32)> = directed
            .iter()
            .map(|&(a, b)| (a.min(b), a.max(b)))
            .collect();
        sort_pairs(&ctx, &mut undirected);
        undirected.dedup();

        let mut symmetric: Vec<(u32, u32)> = Vec::with_capacity(undirected.len() * 2);
        for &(a, b) in &undirected {
            symmetric.push((a, b));
            symmetric.push((b, a));
        }
        sort_pairs(&ctx, &mut symmetric);

        let n = ids.len();
        let (adj_offsets, adj) = csr(n, &symmetric);
        let (out_offsets, out) = csr(n, &directed);
        Self {
            ids,
            adj_offsets,
            adj,
            out_offsets,
            out,
            stored_edges: g.edge_count() as u64,
        }
    }

    pub(crate) fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub(crate) fn degree(&self, v: usize) -> usize {
        self.adj_offsets[v + 1] - self.adj_offsets[v]
    }

    pub(crate) fn neighbors(&self, v: usize) -> &[u32] {
        &self.adj[self.adj_offsets[v]..self.adj_offsets[v + 1]]
    }

    fn out_simple(&self, v: usize) -> &[u32] {
        &self.out[self.out_offsets[v]..self.out_offsets[v + 1]]
    }

    fn wedges(&self) -> u128 {
        (0..self.vertex_count())
            .map(|v| {
                let d = self.degree(v) as u128;
                d * d.saturating_sub(1) / 2
            })
            .sum()
    }

    /// Degree-ordered neighbor intersection; every triangle is counted once
    /// at its lowest-rank vertex, with ranks ordered by (degree, id).
    fn triangles(&self, ctx: &ExecutionContext) -> u64 {
        let n = self.vertex_count();
        if n == 0 {
            return 0;
        }
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.sort_unstable_by_key(|&v| (self.degree(v as usize), self.ids[v as usize]));
        let mut position = vec![0u32; n];
        for (p, &v) in order.iter().enumerate() {
            position[v as usize] = p as u32;
        }

        // Forward adjacency in rank space: edges point from lower to higher
        // rank, lists sorted ascending.
        let mut forward_pairs: Vec<(u32, u32)> = Vec::with_capacity(self.adj.len() / 2);
        for v in 0..n {
            let pv = position[v];
            for &w in self.neighbors(v) {
                let pw = position[w as usize];
                if pv < pw {
                    forward_pairs.push((pv, pw));
                }
            }
        }
        sort_pairs(ctx, &mut forward_pairs);
        let (offsets, forward) = csr(n, &forward_pairs);

        let chunks = n.div_ceil(CHUNK);
        let partials = ctx.run_stage(chunks, |c| {
            let mut count = 0u64;
            for p in c * CHUNK..((c + 1) * CHUNK).min(n) {
                let list_p = &forward[offsets[p]..offsets[p + 1]];
                for &q in list_p {
                    let list_q = &forward[offsets[q as usize]..offsets[q as usize + 1]];
                    count += sorted_intersection_len(list_p, list_q);
                }
            }
            count
        });
        partials.into_iter().sum()
    }

    /// Local clustering coefficient of one vertex. The numerator counts
    /// distinct neighbor pairs connected by a stored edge: ordered pairs
    /// over d(d−1) in `Directed` mode; in `Undirected` mode every link is
    /// seen from both ends, so the doubled count over d(d−1) equals links
    /// over d(d−1)/2. Vertices with degree < 2 score zero. `stamp` is a
    /// scratch array of length |V| whose entries never equal `v`.
    fn local_cc(&self, v: usize, mode: LocalCcMode, stamp: &mut [u32]) -> f64 {
        let d = self.degree(v);
        if d < 2 {
            return 0.0;
        }
        let neighborhood = self.neighbors(v);
        for &x in neighborhood {
            stamp[x as usize] = v as u32;
        }
        let mut connected = 0u64;
        for &x in neighborhood {
            let among = match mode {
                LocalCcMode::Directed => self.out_simple(x as usize),
                LocalCcMode::Undirected => self.neighbors(x as usize),
            };
            connected += among
                .iter()
                .filter(|&&y| stamp[y as usize] == v as u32)
                .count() as u64;
        }
        connected as f64 / (d as u64 * (d as u64 - 1)) as f64
    }

    /// Mean local clustering coefficient over all vertices, accumulated in
    /// fixed chunks so the float sum is independent of parallelism.
    fn avg_local_cc(&self, ctx: &ExecutionContext, mode: LocalCcMode) -> f64 {
        let n = self.vertex_count();
        let chunks = n.div_ceil(CHUNK);
        let partials = ctx.run_stage(chunks, |c| {
            let mut stamp = vec![u32::MAX; n];
            let mut sum = 0.0f64;
            for v in c * CHUNK..((c + 1) * CHUNK).min(n) {
                sum += self.local_cc(v, mode, &mut stamp);
            }
            sum
        });
        let total: f64 = partials.into_iter().sum();
        total / n as f64
    }
}

fn sort_pairs(ctx: &ExecutionContext, pairs: &mut [(u32, u32)]) {
    if ctx.parallelism() > 1 {
        use rayon::slice::ParallelSliceMut;
        ctx.install(|| pairs.par_sort_unstable());
    } else {
        pairs.sort_unstable();
    }
}

fn csr(n: usize, sorted_pairs: &[(u32, u32)]) -> (Vec<usize>, Vec<u32>) {
    let mut offsets = Vec::with_capacity(n + 1);
    let mut flat = Vec::with_capacity(sorted_pairs.len());
    let mut cursor = 0usize;
    offsets.push(0);
    for v in 0..n as u32 {
        while cursor < sorted_pairs.len() && sorted_pairs[cursor].0 == v {
            flat.push(sorted_pairs[cursor].1);
            cursor += 1;
        }
        offsets.push(flat.len());
    }
    (offsets, flat)
}

fn sorted_intersection_len(a: &[u32], b: &[u32]) -> u64 {
    let (mut i, mut j, mut count) = (0, 0, 0u64);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// Ratio of stored edges to all possible ordered vertex pairs:
/// |E| / (|V| · (|V| − 1)).
pub fn density(g: &Graph) -> Result<f64> {
    let n = g.vertex_count() as u128;
    if n < 2 {
        return Err(Error::UndefinedMetric {
            metric: "density",
            reason: "requires at least two vertices".into(),
        });
    }
    Ok(g.edge_count() as f64 / (n * (n - 1)) as f64)
}

/// Number of triangles in the underlying undirected simple graph.
pub fn triangle_count(g: &Graph) -> u64 {
    CompactGraph::build(g).triangles(g.context())
}

/// Global clustering coefficient (transitivity): 3 · triangles / wedges,
/// where a wedge is an unordered pair of distinct neighbors of one vertex.
pub fn global_clustering(g: &Graph) -> Result<f64> {
    let compact = CompactGraph::build(g);
    let wedges = compact.wedges();
    if wedges == 0 {
        return Err(Error::UndefinedMetric {
            metric: "global_cc",
            reason: "graph has no wedges".into(),
        });
    }
    let triangles = compact.triangles(g.context());
    Ok(3.0 * triangles as f64 / wedges as f64)
}

/// Mean local clustering coefficient over all vertices.
pub fn avg_local_clustering(g: &Graph, mode: LocalCcMode) -> Result<f64> {
    if g.vertex_count() == 0 {
        return Err(Error::UndefinedMetric {
            metric: "avg_local_cc",
            reason: "empty vertex set".into(),
        });
    }
    let compact = CompactGraph::build(g);
    Ok(compact.avg_local_cc(g.context(), mode))
}

/// Number of weakly connected components, via min-label propagation on the
/// BSP engine (edge directions ignored).
pub fn wcc_count(g: &Graph) -> u64 {
    if g.vertex_count() == 0 {
        return 0;
    }
    let mut pairs: Vec<(u64, u64)> = g
        .edges()
        .iter()
        .flat_map(|e| [(e.source, e.target), (e.target, e.source)])
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    let initial: Vec<Envelope<u64>> = pairs
        .into_iter()
        .map(|(sender, target)| Envelope {
            sender,
            target,
            payload: sender,
        })
        .collect();

    let outcome = BspProgram::new(g)
        .run(
            |v| (v.id, false),
            |v, inbox| {
                if let Some(best) = inbox.iter().map(|m| m.payload).min() {
                    if best < *v.state {
                        *v.state = best;
                        let mut neighbors: Vec<u64> = v
                            .out_edges
                            .iter()
                            .map(|e| e.target)
                            .chain(v.in_neighbors.iter().copied())
                            .collect();
                        neighbors.sort_unstable();
                        neighbors.dedup();
                        let label = *v.state;
                        for n in neighbors {
                            v.send(n, label);
                        }
                    }
                }
                v.vote_to_halt();
            },
            |_, _| false,
            initial,
        )
        .expect("label propagation only messages graph vertices");

    let mut labels: Vec<u64> = outcome.states.into_iter().map(|(_, label)| label).collect();
    labels.sort_unstable();
    labels.dedup();
    labels.len() as u64
}

/// Undirected-simple degree statistics over all vertices.
pub fn degree_stats(g: &Graph) -> Result<DegreeStats> {
    let compact = CompactGraph::build(g);
    degree_stats_from(&compact)
}

/// Per-vertex (id, undirected-simple degree, local clustering coefficient)
/// in ascending id order; the attributes the DOT export annotates.
pub(crate) fn vertex_annotations(g: &Graph, mode: LocalCcMode) -> Vec<(u64, u64, f64)> {
    let ctx = g.context();
    let compact = CompactGraph::build(g);
    let n = compact.vertex_count();
    let chunks = n.div_ceil(CHUNK);
    let per_chunk = ctx.run_stage(chunks, |c| {
        let mut stamp = vec![u32::MAX; n];
        let mut out = Vec::new();
        for v in c * CHUNK..((c + 1) * CHUNK).min(n) {
            let cc = compact.local_cc(v, mode, &mut stamp);
            out.push((compact.ids[v], compact.degree(v) as u64, cc));
        }
        out
    });
    per_chunk.into_iter().flatten().collect()
}

fn degree_stats_from(compact: &CompactGraph) -> Result<DegreeStats> {
    let n = compact.vertex_count();
    if n == 0 {
        return Err(Error::UndefinedMetric {
            metric: "degree statistics",
            reason: "empty vertex set".into(),
        });
    }
    let mut min = u64::MAX;
    let mut max = 0u64;
    let mut sum = 0u64;
    for v in 0..n {
        let d = compact.degree(v) as u64;
        min = min.min(d);
        max = max.max(d);
        sum += d;
    }
    Ok(DegreeStats {
        d_avg: sum as f64 / n as f64,
        d_min: min,
        d_max: max,
    })
}

/// Computes the full report. Undefined metrics become nulls carrying their
/// reason; with `skip_heavy` the triangle and clustering fields are nulled
/// without being computed.
pub fn metrics_report(g: &Graph, options: &MetricsOptions) -> MetricsReport {
    let ctx = g.context();
    let compact = CompactGraph::build(g);
    let n = compact.vertex_count() as u64;
    let edge_count = compact.stored_edges;

    let density = MetricValue::from_result(density(g));
    let (triangles, global_cc, avg_local_cc) = if options.skip_heavy {
        let reason = "skipped: heavy metrics disabled";
        (
            MetricValue::Null {
                null: reason.into(),
            },
            MetricValue::Null {
                null: reason.into(),
            },
            MetricValue::Null {
                null: reason.into(),
            },
        )
    } else {
        let t = compact.triangles(ctx);
        let wedges = compact.wedges();
        let global = if wedges == 0 {
            MetricValue::Null {
                null: Error::UndefinedMetric {
                    metric: "global_cc",
                    reason: "graph has no wedges".into(),
                }
                .to_string(),
            }
        } else {
            MetricValue::Value(3.0 * t as f64 / wedges as f64)
        };
        let local = if n == 0 {
            MetricValue::Null {
                null: Error::UndefinedMetric {
                    metric: "avg_local_cc",
                    reason: "empty vertex set".into(),
                }
                .to_string(),
            }
        } else {
            MetricValue::Value(compact.avg_local_cc(ctx, options.local_cc_mode))
        };
        (MetricValue::Value(t), global, local)
    };

    let degrees = MetricValue::from_result(degree_stats_from(&compact));
    let (d_avg, d_min, d_max) = match degrees {
        MetricValue::Value(d) => (
            MetricValue::Value(d.d_avg),
            MetricValue::Value(d.d_min),
            MetricValue::Value(d.d_max),
        ),
        MetricValue::Null { null } => (
            MetricValue::Null { null: null.clone() },
            MetricValue::Null { null: null.clone() },
            MetricValue::Null { null },
        ),
    };

    MetricsReport {
        vertex_count: n,
        edge_count,
        density,
        triangles,
        global_cc,
        avg_local_cc,
        wcc_count: wcc_count(g),
        d_avg,
        d_min,
        d_max,
    }
}

/// One row of a report comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub metric: &'static str,
    pub a: Option<f64>,
    pub b: Option<f64>,
    /// b / a; 1.0 when the values are equal, absent when either side is
    /// null or the base is zero.
    pub ratio: Option<f64>,
}

/// A side-by-side diff of two reports.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportComparison {
    pub rows: Vec<ComparisonRow>,
}

impl MetricsReport {
    /// Field values as displayable numbers, in canonical field order.
    pub fn numeric_fields(&self) -> Vec<(&'static str, Option<f64>)> {
        vec![
            ("vertex_count", Some(self.vertex_count as f64)),
            ("edge_count", Some(self.edge_count as f64)),
            ("density", self.density.value().copied()),
            ("triangles", self.triangles.value().map(|&t| t as f64)),
            ("global_cc", self.global_cc.value().copied()),
            ("avg_local_cc", self.avg_local_cc.value().copied()),
            ("wcc_count", Some(self.wcc_count as f64)),
            ("d_avg", self.d_avg.value().copied()),
            ("d_min", self.d_min.value().map(|&d| d as f64)),
            ("d_max", self.d_max.value().map(|&d| d as f64)),
        ]
    }
}

/// Side-by-side values plus the ratio b/a per metric.
pub fn compare_reports(a: &MetricsReport, b: &MetricsReport) -> ReportComparison {
    let rows = a
        .numeric_fields()
        .into_iter()
        .zip(b.numeric_fields())
        .map(|((metric, va), (_, vb))| {
            let ratio = match (va, vb) {
                (Some(x), Some(y)) if x == y => Some(1.0),
                (Some(x), Some(y)) if x != 0.0 => Some(y / x),
                _ => None,
            };
            ComparisonRow {
                metric,
                a: va,
                b: vb,
                ratio,
            }
        })
        .collect();
    ReportComparison { rows }
}

impl std::fmt::Display for ReportComparison {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "{:<14} {:>16} {:>16} {:>10}",
            "metric", "a", "b", "b/a"
        )?;
        for row in &self.rows {
            let fmt_value = |v: Option<f64>| match v {
                // d_avg is stored as a real and rounded half-up for display.
                Some(x) if row.metric == "d_avg" => format!("{:.0}", (x + 0.5).floor()),
                Some(x) if x.fract() == 0.0 && x.abs() < 1e15 => format!("{x:.0}"),
                Some(x) => format!("{x:.7}"),
                None => "—".into(),
            };
            let ratio = match row.ratio {
                Some(r) => format!("{r:.4}"),
                None => "—".into(),
            };
            writeln!(
                f,
                "{:<14} {:>16} {:>16} {:>10}",
                row.metric,
                fmt_value(row.a),
                fmt_value(row.b),
                ratio
            )?;
        }
        Ok(())
    }
}
