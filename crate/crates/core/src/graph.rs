//! Undirected, optionally weighted graphs and the generators used throughout
//! the crate.
//!
//! Vertices are dense indices `0..n`. Edges are stored once in canonical form
//! `(u, v, w)` with `u < v`, sorted lexicographically; adjacency lists are kept
//! sorted as well so that every traversal order is deterministic.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    adj: Vec<Vec<usize>>,
    adj_weights: Vec<Vec<f64>>,
    weighted_degree: Vec<f64>,
    weighted: bool,
}

impl Graph {
    /// Builds an unweighted graph. Every edge gets weight 1.
    pub fn new<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::with_weights(n, edges.into_iter().map(|(u, v)| (u, v, 1.0)))
    }

    /// Builds a weighted graph. Weights must be finite and strictly positive;
    /// callers omit an edge instead of giving it weight zero.
    pub fn with_weights<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        if n == 0 {
            return Err(Error::InvalidParameter("graph must have at least one vertex".into()));
        }
        let mut canon = Vec::new();
        for (u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge {u}-{v} references a vertex outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidWeight { u, v, weight: w });
            }
            canon.push((u.min(v), u.max(v), w));
        }
        canon.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        for pair in canon.windows(2) {
            if (pair[0].0, pair[0].1) == (pair[1].0, pair[1].1) {
                return Err(Error::DuplicateEdge(pair[0].0, pair[0].1));
            }
        }

        let mut adj = vec![Vec::new(); n];
        for &(u, v, w) in &canon {
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        let mut neighbors = Vec::with_capacity(n);
        let mut adj_weights = Vec::with_capacity(n);
        for mut list in adj {
            list.sort_by_key(|&(x, _)| x);
            neighbors.push(list.iter().map(|&(x, _)| x).collect::<Vec<_>>());
            adj_weights.push(list.iter().map(|&(_, w)| w).collect::<Vec<_>>());
        }
        let weighted_degree = adj_weights.iter().map(|ws| ws.iter().sum()).collect();
        let weighted = canon.iter().any(|&(_, _, w)| w != 1.0);

        Ok(Graph {
            n,
            edges: canon,
            adj: neighbors,
            adj_weights,
            weighted_degree,
            weighted,
        })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Canonical edge list, `u < v`, sorted.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    /// Weights aligned with [`Graph::neighbors`].
    pub fn neighbor_weights(&self, u: usize) -> &[f64] {
        &self.adj_weights[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn weighted_degree(&self, u: usize) -> f64 {
        self.weighted_degree[u]
    }

    /// True when at least one edge has a weight other than 1.
    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && self.adj[u].binary_search(&v).is_ok()
    }

    /// Weight of `uv`, if present.
    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        if u >= self.n {
            return None;
        }
        self.adj[u].binary_search(&v).ok().map(|i| self.adj_weights[u][i])
    }

    pub fn is_regular(&self) -> bool {
        let d = self.degree(0);
        self.adj.iter().all(|a| a.len() == d)
    }

    /// Fails unless every vertex has a neighbor and the graph is connected.
    pub fn require_connected(&self) -> Result<()> {
        if self.n > 1 {
            if let Some(u) = (0..self.n).find(|&u| self.adj[u].is_empty()) {
                return Err(Error::IsolatedVertex(u));
            }
        }
        if is_connected(self) {
            Ok(())
        } else {
            Err(Error::Disconnected)
        }
    }

    pub fn require_unweighted(&self) -> Result<()> {
        if self.weighted {
            Err(Error::WeightedUnsupported)
        } else {
            Ok(())
        }
    }

    /// Serializes to the edge-list text format: one `u v` line per edge,
    /// `u v w` when the weight differs from 1.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for &(u, v, w) in &self.edges {
            if w == 1.0 {
                let _ = writeln!(out, "{u} {v}");
            } else {
                let _ = writeln!(out, "{u} {v} {w}");
            }
        }
        out
    }
}

/// Parses the edge-list format. Blank lines and `#` comments are skipped; the
/// vertex count is one more than the largest index mentioned.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut edges = Vec::new();
    let mut max_vertex = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 && fields.len() != 3 {
            return Err(Error::Parse {
                line: line_no,
                reason: format!("expected `u v [w]`, found {} fields", fields.len()),
            });
        }
        let vertex = |s: &str| {
            s.parse::<usize>().map_err(|_| Error::Parse {
                line: line_no,
                reason: format!("`{s}` is not a vertex index"),
            })
        };
        let u = vertex(fields[0])?;
        let v = vertex(fields[1])?;
        let w = match fields.get(2) {
            Some(s) => s.parse::<f64>().map_err(|_| Error::Parse {
                line: line_no,
                reason: format!("`{s}` is not a weight"),
            })?,
            None => 1.0,
        };
        if w < 0.0 {
            return Err(Error::InvalidWeight { u, v, weight: w });
        }
        max_vertex = Some(max_vertex.unwrap_or(0).max(u).max(v));
        edges.push((u, v, w));
    }
    let n = max_vertex
        .map(|m| m + 1)
        .ok_or_else(|| Error::InvalidParameter("edge list contains no edges".into()))?;
    Graph::with_weights(n, edges)
}

/// Breadth-first connectivity check.
pub fn is_connected(g: &Graph) -> bool {
    let n = g.order();
    if n == 0 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    count == n
}

/// The graph families analyzed by the crate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GraphFamily {
    Complete {
        n: usize,
    },
    Cycle {
        n: usize,
    },
    Path {
        n: usize,
    },
    /// Center is vertex 0, leaves are `1..=leaves`.
    Star {
        leaves: usize,
    },
    /// Vertices `0..n` form the clique, `n..2n` the ring; `i` is matched with `n + i`.
    CliqueWheel {
        n: usize,
    },
    /// A star whose edge to leaf 1 has weight `eps`; all others weigh 1.
    WeightedStar {
        leaves: usize,
        eps: f64,
    },
}

impl GraphFamily {
    pub fn tag(&self) -> &'static str {
        match self {
            GraphFamily::Complete { .. } => "complete",
            GraphFamily::Cycle { .. } => "cycle",
            GraphFamily::Path { .. } => "path",
            GraphFamily::Star { .. } => "star",
            GraphFamily::CliqueWheel { .. } => "clique_wheel",
            GraphFamily::WeightedStar { .. } => "weighted_star",
        }
    }

    pub fn label(&self) -> String {
        match *self {
            GraphFamily::Complete { n }
            | GraphFamily::Cycle { n }
            | GraphFamily::Path { n }
            | GraphFamily::CliqueWheel { n } => format!("{}({n})", self.tag()),
            GraphFamily::Star { leaves } => format!("star({leaves})"),
            GraphFamily::WeightedStar { leaves, eps } => format!("weighted_star({leaves},{eps})"),
        }
    }

    pub fn generate(&self) -> Result<Graph> {
        generate(self)
    }
}

fn require_min(name: &str, value: usize, min: usize) -> Result<()> {
    if value < min {
        Err(Error::InvalidParameter(format!(
            "{name} requires n >= {min}, got {value}"
        )))
    } else {
        Ok(())
    }
}

pub fn generate(family: &GraphFamily) -> Result<Graph> {
    match *family {
        GraphFamily::Complete { n } => {
            require_min("complete", n, 2)?;
            Graph::new(n, complete_edges(0, n))
        }
        GraphFamily::Cycle { n } => {
            require_min("cycle", n, 3)?;
            Graph::new(n, (0..n).map(|i| (i, (i + 1) % n)))
        }
        GraphFamily::Path { n } => {
            require_min("path", n, 2)?;
            Graph::new(n, (1..n).map(|i| (i - 1, i)))
        }
        GraphFamily::Star { leaves } => {
            require_min("star", leaves, 1)?;
            Graph::new(leaves + 1, (1..=leaves).map(|i| (0, i)))
        }
        GraphFamily::CliqueWheel { n } => {
            require_min("clique_wheel", n, 3)?;
            let clique = complete_edges(0, n);
            let ring = (0..n).map(|i| (n + i, n + (i + 1) % n));
            let matching = (0..n).map(|i| (i, n + i));
            Graph::new(2 * n, clique.chain(ring).chain(matching))
        }
        GraphFamily::WeightedStar { leaves, eps } => {
            require_min("weighted_star", leaves, 1)?;
            if !(eps.is_finite() && eps > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "weighted_star requires eps > 0, got {eps}"
                )));
            }
            Graph::with_weights(leaves + 1, (1..=leaves).map(|i| (0, i, if i == 1 { eps } else { 1.0 })))
        }
    }
}

fn complete_edges(offset: usize, n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |u| (u + 1..n).map(move |v| (offset + u, offset + v)))
}

pub fn clique_wheel_clique_vertices(n: usize) -> Vec<usize> {
    (0..n).collect()
}

pub fn clique_wheel_ring_vertices(n: usize) -> Vec<usize> {
    (n..2 * n).collect()
}

/// A random connected graph: a uniformly attached random tree plus each
/// remaining pair independently with probability `p`.
pub fn random_connected<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Graph> {
    require_min("random_connected", n, 2)?;
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let mut present = vec![false; n * n];
    let mut edges = Vec::new();
    for i in 1..n {
        let parent = order[rng.random_range(0..i)];
        let child = order[i];
        present[parent * n + child] = true;
        present[child * n + parent] = true;
        edges.push((parent, child));
    }
    for u in 0..n {
        for v in u + 1..n {
            if !present[u * n + v] && rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges)
}
