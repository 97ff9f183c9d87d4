//! Naive sequential reference implementations of every metric, built on
//! hash-set adjacency and exhaustive enumeration.
//!
//! These exist to cross-check the parallel implementations on small graphs;
//! they share no code path with [`crate::metrics`]. Only use them on graphs
//! with a few dozen vertices — the triangle count alone is O(|V|³).

use std::collections::{HashMap, HashSet};

use crate::graph::Graph;
use crate::metrics::LocalCcMode;

struct SimpleView {
    ids: Vec<u64>,
    /// Undirected simple neighbor sets (no self-loops).
    neighbors: HashMap<u64, HashSet<u64>>,
    /// Distinct stored directed pairs, self-loops excluded.
    directed: HashSet<(u64, u64)>,
}

impl SimpleView {
    fn build(g: &Graph) -> Self {
        let ids = g.sorted_vertex_ids();
        let mut neighbors: HashMap<u64, HashSet<u64>> =
            ids.iter().map(|&id| (id, HashSet::new())).collect();
        let mut directed = HashSet::new();
        for e in g.edges().iter() {
            if e.source == e.target {
                continue;
            }
            neighbors.get_mut(&e.source).unwrap().insert(e.target);
            neighbors.get_mut(&e.target).unwrap().insert(e.source);
            directed.insert((e.source, e.target));
        }
        Self {
            ids,
            neighbors,
            directed,
        }
    }

    fn adjacent(&self, a: u64, b: u64) -> bool {
        self.neighbors[&a].contains(&b)
    }
}

pub fn density(g: &Graph) -> Option<f64> {
    let n = g.vertex_count() as u128;
    if n < 2 {
        return None;
    }
    Some(g.edge_count() as f64 / (n * (n - 1)) as f64)
}

/// Counts triangles by checking every unordered vertex triple.
pub fn triangle_count(g: &Graph) -> u64 {
    let view = SimpleView::build(g);
    let ids = &view.ids;
    let mut count = 0;
    for i in 0..ids.len() {
        for j in (i + 1)..ids.len() {
            if !view.adjacent(ids[i], ids[j]) {
                continue;
            }
            for k in (j + 1)..ids.len() {
                if view.adjacent(ids[i], ids[k]) && view.adjacent(ids[j], ids[k]) {
                    count += 1;
                }
            }
        }
    }
    count
}

/// Counts wedges by enumerating neighbor pairs of every center vertex.
pub fn wedge_count(g: &Graph) -> u64 {
    let view = SimpleView::build(g);
    let mut count = 0;
    for id in &view.ids {
        let neighbors: Vec<u64> = view.neighbors[id].iter().copied().collect();
        for i in 0..neighbors.len() {
            for _ in (i + 1)..neighbors.len() {
                count += 1;
            }
        }
    }
    count
}

pub fn global_clustering(g: &Graph) -> Option<f64> {
    let wedges = wedge_count(g);
    if wedges == 0 {
        return None;
    }
    Some(3.0 * triangle_count(g) as f64 / wedges as f64)
}

pub fn avg_local_clustering(g: &Graph, mode: LocalCcMode) -> Option<f64> {
    let view = SimpleView::build(g);
    if view.ids.is_empty() {
        return None;
    }
    let mut sum = 0.0;
    for id in &view.ids {
        let neighbors: Vec<u64> = {
            let mut v: Vec<u64> = view.neighbors[id].iter().copied().collect();
            v.sort_unstable();
            v
        };
        let d = neighbors.len() as u64;
        if d < 2 {
            continue;
        }
        let mut connected = 0u64;
        for (i, &x) in neighbors.iter().enumerate() {
            for &y in &neighbors[(i + 1)..] {
                match mode {
                    LocalCcMode::Directed => {
                        if view.directed.contains(&(x, y)) {
                            connected += 1;
                        }
                        if view.directed.contains(&(y, x)) {
                            connected += 1;
                        }
                    }
                    LocalCcMode::Undirected => {
                        if view.adjacent(x, y) {
                            connected += 1;
                        }
                    }
                }
            }
        }
        let denominator = match mode {
            LocalCcMode::Directed => (d * (d - 1)) as f64,
            LocalCcMode::Undirected => (d * (d - 1)) as f64 / 2.0,
        };
        sum += connected as f64 / denominator;
    }
    Some(sum / view.ids.len() as f64)
}

/// Weakly connected component count via sequential union-find with path
/// halving and union by size.
pub fn wcc_union_find(g: &Graph) -> u64 {
    let ids = g.sorted_vertex_ids();
    let index: HashMap<u64, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let mut parent: Vec<usize> = (0..ids.len()).collect();
    let mut size = vec![1usize; ids.len()];

    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }

    for e in g.edges().iter() {
        let a = find(&mut parent, index[&e.source]);
        let b = find(&mut parent, index[&e.target]);
        if a != b {
            let (big, small) = if size[a] >= size[b] { (a, b) } else { (b, a) };
            parent[small] = big;
            size[big] += size[small];
        }
    }

    let mut roots = HashSet::new();
    for v in 0..ids.len() {
        roots.insert(find(&mut parent, v));
    }
    roots.len() as u64
}

/// (d_avg, d_min, d_max) over undirected-simple degrees.
pub fn degree_stats(g: &Graph) -> Option<(f64, u64, u64)> {
    let view = SimpleView::build(g);
    if view.ids.is_empty() {
        return None;
    }
    let degrees: Vec<u64> = view
        .ids
        .iter()
        .map(|id| view.neighbors[id].len() as u64)
        .collect();
    let sum: u64 = degrees.iter().sum();
    Some((
        sum as f64 / degrees.len() as f64,
        *degrees.iter().min().unwrap(),
        *degrees.iter().max().unwrap(),
    ))
}
