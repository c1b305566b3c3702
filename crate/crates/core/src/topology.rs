//! Barabási-Albert peer graphs.
//!
//! A [`Topology`] is an undirected graph stored as compressed sorted adjacency
//! lists. [`generate_ba`] grows one by preferential attachment starting from
//! `m` isolated seed nodes, so a valid graph always has exactly `m * (n - m)`
//! edges.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, Rng};

/// Default attachment count, matching Bitcoin Core's eight outbound peers.
pub const DEFAULT_BA_M: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    node_count: usize,
    /// `None` for hand-built graphs that did not come from [`generate_ba`].
    ba_m: Option<usize>,
    seed: u64,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
}

impl Topology {
    /// Builds a graph from raw adjacency lists. Lists are sorted but otherwise
    /// taken as given, so invalid graphs can be represented and diagnosed with
    /// [`validate_topology`].
    pub fn from_adjacency(adjacency: Vec<Vec<u32>>, ba_m: Option<usize>, seed: u64) -> Self {
        let node_count = adjacency.len();
        let mut offsets = Vec::with_capacity(node_count + 1);
        let mut neighbors = Vec::with_capacity(adjacency.iter().map(Vec::len).sum());
        offsets.push(0);
        for mut list in adjacency {
            list.sort_unstable();
            neighbors.extend_from_slice(&list);
            offsets.push(neighbors.len());
        }
        Topology {
            node_count,
            ba_m,
            seed,
            offsets,
            neighbors,
        }
    }

    /// Builds an undirected graph from an edge list. A self-loop `(v, v)`
    /// appears once in `v`'s list.
    pub fn from_edges(node_count: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); node_count];
        for &(u, v) in edges {
            if u as usize >= node_count || v as usize >= node_count {
                return Err(Error::input(alloc::format!(
                    "edge ({u}, {v}) out of range for {node_count} nodes"
                )));
            }
            adjacency[u as usize].push(v);
            if u != v {
                adjacency[v as usize].push(u);
            }
        }
        Ok(Self::from_adjacency(adjacency, None, 0))
    }

    /// Same as [`Topology::from_edges`] but records the generator parameters,
    /// as when reading a stored BA graph back.
    pub fn from_ba_edges(node_count: usize, ba_m: usize, seed: u64, edges: &[(u32, u32)]) -> Result<Self> {
        let mut t = Self::from_edges(node_count, edges)?;
        t.ba_m = Some(ba_m);
        t.seed = seed;
        Ok(t)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn ba_m(&self) -> Option<usize> {
        self.ba_m
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    /// Number of undirected edges, counting a self-loop once.
    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    /// Edges `(u, v)` with `u <= v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.node_count).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .filter(move |&&v| v as usize >= u)
                .map(move |&v| (u as u32, v))
        })
    }

    /// Hop distances from `source`; `u32::MAX` marks unreachable nodes.
    pub fn bfs_distances(&self, source: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.node_count];
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            let next = dist[v] + 1;
            for &u in self.neighbors(v) {
                let u = u as usize;
                if dist[u] == u32::MAX {
                    dist[u] = next;
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.node_count == 0 || self.bfs_distances(0).iter().all(|&d| d != u32::MAX)
    }

    /// Average shortest-path length estimated by BFS from `sources` random
    /// start nodes (all nodes when `sources >= node_count`).
    pub fn mean_shortest_path_estimate(&self, sources: usize, rng: &mut Rng) -> f64 {
        let n = self.node_count;
        if n < 2 {
            return 0.0;
        }
        let starts: Vec<usize> = if sources >= n {
            (0..n).collect()
        } else {
            rand::seq::index::sample(rng, n, sources).into_vec()
        };
        let mut total = 0u64;
        let mut pairs = 0u64;
        for s in starts {
            for (v, d) in self.bfs_distances(s).into_iter().enumerate() {
                if v != s && d != u32::MAX {
                    total += u64::from(d);
                    pairs += 1;
                }
            }
        }
        if pairs == 0 {
            0.0
        } else {
            total as f64 / pairs as f64
        }
    }
}

/// Grows a Barabási-Albert graph with `n` nodes, `m` edges per new node.
///
/// Nodes `0..m` start isolated. Each later node picks `m` distinct targets
/// uniformly from the list of all prior edge endpoints (uniformly among
/// existing nodes while that list is empty), resampling on duplicates.
pub fn generate_ba(n: usize, m: usize, seed: u64) -> Result<Topology> {
    if m == 0 || n == 0 {
        return Err(Error::params("n and m must be positive"));
    }
    if n <= m {
        return Err(Error::params(alloc::format!("need n > m, got n={n}, m={m}")));
    }
    if n > u32::MAX as usize {
        return Err(Error::params("node count exceeds u32 index range"));
    }
    let mut rng = rng_from_seed(seed);
    let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut endpoints: Vec<u32> = Vec::with_capacity(2 * m * (n - m));
    let mut chosen: Vec<u32> = Vec::with_capacity(m);

    for v in m..n {
        chosen.clear();
        while chosen.len() < m {
            let t = if endpoints.is_empty() {
                rng.random_range(0..v) as u32
            } else {
                endpoints[rng.random_range(0..endpoints.len())]
            };
            if t as usize != v && !chosen.contains(&t) {
                chosen.push(t);
            }
        }
        for &t in &chosen {
            adjacency[v].push(t);
            adjacency[t as usize].push(v as u32);
            endpoints.push(t);
            endpoints.push(v as u32);
        }
    }
    Ok(Topology::from_adjacency(adjacency, Some(m), seed))
}

/// Names of the violated [`Topology`] invariants; empty for a valid graph.
pub fn validate_topology(t: &Topology) -> Vec<String> {
    let mut report = Vec::new();
    let n = t.node_count();
    let mut self_loop = false;
    let mut duplicate = false;
    let mut asymmetric = false;
    let mut out_of_range = false;
    for v in 0..n {
        let list = t.neighbors(v);
        if list.windows(2).any(|w| w[0] == w[1]) {
            duplicate = true;
        }
        for &u in list {
            if u as usize >= n {
                out_of_range = true;
                continue;
            }
            if u as usize == v {
                self_loop = true;
            } else if !t.has_edge(u as usize, v) {
                asymmetric = true;
            }
        }
    }
    if out_of_range {
        report.push("out-of-range".into());
    }
    if asymmetric {
        report.push("asymmetric".into());
    }
    if self_loop {
        report.push("self-loop".into());
    }
    if duplicate {
        report.push("duplicate-edge".into());
    }
    if !out_of_range && !t.is_connected() {
        report.push("disconnected".into());
    }
    if let Some(m) = t.ba_m() {
        if n <= m || t.edge_count() != m * (n - m) {
            report.push("edge-count".into());
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeStats {
    pub histogram: BTreeMap<usize, usize>,
    pub min_degree: f64,
    pub max_degree: f64,
    pub mean_degree: f64,
    /// Least-squares slope of ln(count) against ln(degree) over degrees seen
    /// at least [`SLOPE_MIN_COUNT`] times; `None` with fewer than two such
    /// degrees.
    pub loglog_slope: Option<f64>,
}

pub const SLOPE_MIN_COUNT: usize = 5;

pub fn degree_stats(t: &Topology) -> DegreeStats {
    let n = t.node_count();
    let mut histogram = BTreeMap::new();
    let mut sum = 0usize;
    for v in 0..n {
        let d = t.degree(v);
        *histogram.entry(d).or_insert(0) += 1;
        sum += d;
    }
    let min_degree = histogram.keys().next().copied().unwrap_or(0) as f64;
    let max_degree = histogram.keys().next_back().copied().unwrap_or(0) as f64;
    let mean_degree = if n == 0 { 0.0 } else { sum as f64 / n as f64 };

    let points: Vec<(f64, f64)> = histogram
        .iter()
        .filter(|&(&d, &c)| d > 0 && c >= SLOPE_MIN_COUNT)
        .map(|(&d, &c)| (libm::log(d as f64), libm::log(c as f64)))
        .collect();
    let loglog_slope = least_squares_slope(&points);

    DegreeStats {
        histogram,
        min_degree,
        max_degree,
        mean_degree,
        loglog_slope,
    }
}

fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}
