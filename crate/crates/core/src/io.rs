//! Graph ingestion and export: SNAP-style edge lists, DOT visualization
//! output, metric report files, and a synthetic power-law generator for
//! benchmarks.

use std::fmt::Display;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::ops::Range;
use std::path::Path;

use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;

use crate::dataflow::ExecutionContext;
use crate::error::{Error, Result};
use crate::graph::{EdgeRecord, Graph, VertexRecord};
use crate::metrics::{self, LocalCcMode, MetricValue, MetricsReport, REPORT_FIELDS};

/// Whitespace-delimited source/target lines with comment and blank lines
/// skipped.
#[derive(Debug, Clone)]
pub struct EdgeListFormat {
    pub comment_prefix: char,
}

impl Default for EdgeListFormat {
    fn default() -> Self {
        Self { comment_prefix: '#' }
    }
}

struct ParsedChunk {
    pairs: Vec<(u64, u64)>,
    line_count: usize,
}

struct ChunkError {
    local_line: usize,
    reason: String,
}

/// Reads an edge list: one edge per data line in file order (edge ids are
/// assigned 0..|E|−1 in that order), vertices are the distinct endpoint
/// ids. Chunks of the file are parsed concurrently, split at line
/// boundaries. An empty file yields the empty graph.
pub fn read_edge_list(
    ctx: &ExecutionContext,
    path: impl AsRef<Path>,
    format: &EdgeListFormat,
) -> Result<Graph> {
    let path = path.as_ref();
    let bytes = std::fs::read(path)?;
    let text = match std::str::from_utf8(&bytes) {
        Ok(t) => t,
        Err(e) => {
            let line = bytes[..e.valid_up_to()]
                .iter()
                .filter(|&&b| b == b'\n')
                .count()
                + 1;
            return Err(Error::MalformedLine {
                path: path.display().to_string(),
                line,
                reason: "file is not valid UTF-8".into(),
            });
        }
    };

    let ranges = split_at_line_boundaries(text, ctx.parallelism());
    let chunks: Vec<std::result::Result<ParsedChunk, ChunkError>> =
        ctx.run_stage(ranges.len(), |i| parse_chunk(&text[ranges[i].clone()], format));

    let mut pairs: Vec<(u64, u64)> = Vec::new();
    let mut lines_before = 0usize;
    for chunk in chunks {
        match chunk {
            Ok(mut c) => {
                pairs.append(&mut c.pairs);
                lines_before += c.line_count;
            }
            Err(e) => {
                return Err(Error::MalformedLine {
                    path: path.display().to_string(),
                    line: lines_before + e.local_line,
                    reason: e.reason,
                })
            }
        }
    }

    let mut ids: Vec<u64> = pairs.iter().flat_map(|&(s, t)| [s, t]).collect();
    ids.sort_unstable();
    ids.dedup();
    let vertices: Vec<VertexRecord> = ids.into_iter().map(VertexRecord::new).collect();
    let edges: Vec<EdgeRecord> = pairs
        .into_iter()
        .enumerate()
        .map(|(i, (source, target))| EdgeRecord {
            id: i as u64,
            source,
            target,
        })
        .collect();
    Ok(Graph::from_parts_unchecked(
        ctx.dataset(vertices),
        ctx.dataset(edges),
    ))
}

fn split_at_line_boundaries(text: &str, parts: usize) -> Vec<Range<usize>> {
    if text.is_empty() {
        return Vec::new();
    }
    let approx = text.len().div_ceil(parts.max(1));
    let mut ranges = Vec::with_capacity(parts);
    let mut start = 0usize;
    while start < text.len() {
        let mut end = (start + approx).min(text.len());
        match text[end..].find('\n') {
            Some(offset) => end += offset + 1,
            None => end = text.len(),
        }
        ranges.push(start..end);
        start = end;
    }
    ranges
}

fn parse_chunk(
    chunk: &str,
    format: &EdgeListFormat,
) -> std::result::Result<ParsedChunk, ChunkError> {
    let mut pairs = Vec::new();
    let mut line_count = 0usize;
    for line in chunk.lines() {
        line_count += 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with(format.comment_prefix) {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(ChunkError {
                local_line: line_count,
                reason: "expected exactly two whitespace-separated vertex ids".into(),
            });
        };
        let parse = |token: &str| {
            token.parse::<u64>().map_err(|_| ChunkError {
                local_line: line_count,
                reason: format!("invalid vertex id {token:?}"),
            })
        };
        pairs.push((parse(a)?, parse(b)?));
    }
    Ok(ParsedChunk { pairs, line_count })
}

/// Writes a tab-delimited edge list, edges sorted by (source, target, edge
/// id). Reading the file back reproduces the edge multiset.
pub fn write_edge_list(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let mut edges = g.edges().collect();
    edges.sort_unstable_by_key(|e| (e.source, e.target, e.id));
    let mut out = BufWriter::new(File::create(path)?);
    for e in &edges {
        writeln!(out, "{}\t{}", e.source, e.target)?;
    }
    out.flush()?;
    Ok(())
}

/// Writes a DOT digraph annotating every vertex with its degree and local
/// clustering coefficient, the attributes a force-directed renderer maps to
/// vertex size and color.
pub fn write_dot(g: &Graph, path: impl AsRef<Path>, mode: LocalCcMode) -> Result<()> {
    let annotations = metrics::vertex_annotations(g, mode);
    let mut edges = g.edges().collect();
    edges.sort_unstable_by_key(|e| (e.source, e.target, e.id));

    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "digraph sample {{")?;
    for (id, degree, local_cc) in &annotations {
        writeln!(out, "  {id} [degree={degree}, local_cc={local_cc}];")?;
    }
    for e in &edges {
        writeln!(out, "  {} -> {};", e.source, e.target)?;
    }
    writeln!(out, "}}")?;
    out.flush()?;
    Ok(())
}

/// Synthetic graph parameters: `edge_count` directed edges over
/// `vertex_count` vertices with endpoints drawn from a power-law degree
/// weighting with exponent `gamma` (endpoint weights rank^(−1/(γ−1))).
/// Self-loops are rejected and redrawn; parallel edges are permitted.
#[derive(Debug, Clone, Copy)]
pub struct SyntheticSpec {
    pub vertex_count: u64,
    pub edge_count: u64,
    pub gamma: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(vertex_count: u64, edge_count: u64, seed: u64) -> Self {
        Self {
            vertex_count,
            edge_count,
            gamma: 2.5,
            seed,
        }
    }
}

pub fn generate_synthetic(ctx: &ExecutionContext, spec: &SyntheticSpec) -> Result<Graph> {
    if spec.vertex_count == 0 {
        return Err(Error::InvalidSyntheticSpec(
            "vertex count must be at least 1".into(),
        ));
    }
    if !(spec.gamma.is_finite() && spec.gamma > 1.0) {
        return Err(Error::InvalidSyntheticSpec(format!(
            "power-law exponent must be finite and greater than 1, got {}",
            spec.gamma
        )));
    }
    if spec.vertex_count == 1 && spec.edge_count > 0 {
        return Err(Error::InvalidSyntheticSpec(
            "cannot draw non-loop edges over a single vertex".into(),
        ));
    }

    let n = spec.vertex_count as usize;
    let exponent = -1.0 / (spec.gamma - 1.0);
    let weights: Vec<f64> = (0..n).map(|i| ((i + 1) as f64).powf(exponent)).collect();
    let alias = WeightedAliasIndex::new(weights)
        .map_err(|e| Error::InvalidSyntheticSpec(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut edges = Vec::with_capacity(spec.edge_count as usize);
    for id in 0..spec.edge_count {
        let mut attempts = 0;
        let (source, target) = loop {
            let s = alias.sample(&mut rng) as u64;
            let t = alias.sample(&mut rng) as u64;
            if s != t {
                break (s, t);
            }
            attempts += 1;
            if attempts > 1000 {
                return Err(Error::InvalidSyntheticSpec(
                    "endpoint weights too concentrated to avoid self-loops".into(),
                ));
            }
        };
        edges.push(EdgeRecord { id, source, target });
    }
    let vertices: Vec<VertexRecord> = (0..spec.vertex_count).map(VertexRecord::new).collect();
    Ok(Graph::from_parts_unchecked(
        ctx.dataset(vertices),
        ctx.dataset(edges),
    ))
}

/// Writes a report; `.json` paths get the structured form, everything else
/// the flat `metric = value` text document.
pub fn write_report(report: &MetricsReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = BufWriter::new(File::create(path)?);
    if has_json_extension(path) {
        serde_json::to_writer_pretty(&mut out, report)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
        writeln!(out)?;
    } else {
        out.write_all(report_to_text(report).as_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a report written by [`write_report`], dispatching on the `.json`
/// extension.
pub fn read_report(path: impl AsRef<Path>) -> Result<MetricsReport> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    if has_json_extension(path) {
        serde_json::from_str(&text).map_err(|e| Error::MalformedReport {
            field: "<json>".into(),
            reason: e.to_string(),
        })
    } else {
        report_from_text(&text)
    }
}

fn has_json_extension(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

fn format_metric<T: Display>(value: &MetricValue<T>) -> String {
    match value {
        MetricValue::Value(v) => v.to_string(),
        MetricValue::Null { null } => format!("null ({null})"),
    }
}

/// Flat key-value serialization, one `metric = value` line per field in
/// canonical order; absent metrics render as `null (reason)`.
pub fn report_to_text(report: &MetricsReport) -> String {
    let mut out = String::new();
    let mut push = |name: &str, value: String| {
        out.push_str(name);
        out.push_str(" = ");
        out.push_str(&value);
        out.push('\n');
    };
    push("vertex_count", report.vertex_count.to_string());
    push("edge_count", report.edge_count.to_string());
    push("density", format_metric(&report.density));
    push("triangles", format_metric(&report.triangles));
    push("global_cc", format_metric(&report.global_cc));
    push("avg_local_cc", format_metric(&report.avg_local_cc));
    push("wcc_count", report.wcc_count.to_string());
    push("d_avg", format_metric(&report.d_avg));
    push("d_min", format_metric(&report.d_min));
    push("d_max", format_metric(&report.d_max));
    out
}

fn parse_metric<T: std::str::FromStr>(
    field: &str,
    raw: &str,
) -> Result<MetricValue<T>> {
    let raw = raw.trim();
    if raw == "null" {
        return Ok(MetricValue::Null { null: String::new() });
    }
    if let Some(rest) = raw.strip_prefix("null (") {
        let reason = rest.strip_suffix(')').ok_or_else(|| Error::MalformedReport {
            field: field.into(),
            reason: "unterminated null reason".into(),
        })?;
        return Ok(MetricValue::Null {
            null: reason.to_string(),
        });
    }
    raw.parse::<T>()
        .map(MetricValue::Value)
        .map_err(|_| Error::MalformedReport {
            field: field.into(),
            reason: format!("cannot parse value {raw:?}"),
        })
}

fn parse_plain<T: std::str::FromStr>(field: &str, raw: &str) -> Result<T> {
    raw.trim().parse::<T>().map_err(|_| Error::MalformedReport {
        field: field.into(),
        reason: format!("cannot parse value {raw:?}"),
    })
}

/// Parses the flat text form; every field must appear exactly once.
pub fn report_from_text(text: &str) -> Result<MetricsReport> {
    let mut seen: Vec<(&str, &str)> = Vec::new();
    for line in text.lines() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let (key, value) = trimmed.split_once(" = ").ok_or_else(|| Error::MalformedReport {
            field: trimmed.to_string(),
            reason: "expected `name = value`".into(),
        })?;
        if !REPORT_FIELDS.contains(&key) {
            return Err(Error::MalformedReport {
                field: key.into(),
                reason: "unknown field".into(),
            });
        }
        if seen.iter().any(|(k, _)| *k == key) {
            return Err(Error::MalformedReport {
                field: key.into(),
                reason: "duplicate field".into(),
            });
        }
        seen.push((key, value));
    }
    let get = |field: &str| -> Result<&str> {
        seen.iter()
            .find(|(k, _)| *k == field)
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::MalformedReport {
                field: field.into(),
                reason: "missing field".into(),
            })
    };

    Ok(MetricsReport {
        vertex_count: parse_plain("vertex_count", get("vertex_count")?)?,
        edge_count: parse_plain("edge_count", get("edge_count")?)?,
        density: parse_metric("density", get("density")?)?,
        triangles: parse_metric("triangles", get("triangles")?)?,
        global_cc: parse_metric("global_cc", get("global_cc")?)?,
        avg_local_cc: parse_metric("avg_local_cc", get("avg_local_cc")?)?,
        wcc_count: parse_plain("wcc_count", get("wcc_count")?)?,
        d_avg: parse_metric("d_avg", get("d_avg")?)?,
        d_min: parse_metric("d_min", get("d_min")?)?,
        d_max: parse_metric("d_max", get("d_max")?)?,
    })
}
