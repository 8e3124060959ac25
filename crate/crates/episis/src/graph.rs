//! Undirected simple graphs: random generators for contact networks, the
//! social-network rewiring procedure, spectral radius, and edge-list I/O.
//!
//! Every generator takes an explicit seed and documents its draw order, so
//! an independent re-implementation of the same order reproduces the graph
//! bit for bit.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use thiserror::Error;

use crate::rng::rng_from_seed;

/// Default tolerance for [`spectral_radius`] convergence checks.
pub const DEFAULT_SPECTRAL_TOL: f64 = 1e-10;
/// Default iteration cap for [`spectral_radius`].
pub const DEFAULT_SPECTRAL_MAX_ITER: usize = 100_000;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("power iteration did not converge within {max_iter} iterations (last estimate {last})")]
    NoConvergence { max_iter: usize, last: f64 },
    #[error("malformed edge list at line {line}: {reason}")]
    MalformedEdgeList { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// An undirected simple graph on nodes `0..n`.
///
/// The edge set is stored as lexicographically sorted pairs `(i, j)` with
/// `i < j`; neighbor lists are sorted and always consistent with the edge
/// set. Values are immutable after construction and safe to share across
/// threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from an edge list, rejecting self-loops, duplicates
    /// and out-of-range endpoints. Edge orientation is normalized.
    pub fn from_edges(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::InvalidParameter(
                "node count must be positive".into(),
            ));
        }
        let mut normalized: Vec<(usize, usize)> = Vec::new();
        let mut seen = HashSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(GraphError::InvalidParameter(format!(
                    "self-loop at node {a}"
                )));
            }
            if a >= n || b >= n {
                return Err(GraphError::InvalidParameter(format!(
                    "edge ({a}, {b}) out of range for n = {n}"
                )));
            }
            let e = (a.min(b), a.max(b));
            if !seen.insert(e) {
                return Err(GraphError::InvalidParameter(format!(
                    "duplicate edge ({}, {})",
                    e.0, e.1
                )));
            }
            normalized.push(e);
        }
        normalized.sort_unstable();
        let mut adj = vec![Vec::new(); n];
        for &(i, j) in &normalized {
            adj[i].push(j);
            adj[j].push(i);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Graph {
            n,
            edges: normalized,
            adj,
        })
    }

    /// Graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Result<Self, GraphError> {
        Self::from_edges(n, std::iter::empty())
    }

    /// Complete graph `K_n`.
    pub fn complete(n: usize) -> Result<Self, GraphError> {
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
        Self::from_edges(n, edges)
    }

    /// Path graph `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Result<Self, GraphError> {
        Self::from_edges(n, (1..n).map(|i| (i - 1, i)))
    }

    /// Cycle graph on `n >= 3` nodes.
    pub fn cycle(n: usize) -> Result<Self, GraphError> {
        if n < 3 {
            return Err(GraphError::InvalidParameter(
                "cycle needs at least 3 nodes".into(),
            ));
        }
        Self::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    /// Star graph: node 0 joined to every other node.
    pub fn star(n: usize) -> Result<Self, GraphError> {
        Self::from_edges(n, (1..n).map(|i| (0, i)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as sorted `(i, j)` pairs with `i < j`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Sorted neighbor list of node `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i != j && self.adj[i].binary_search(&j).is_ok()
    }

    pub fn mean_degree(&self) -> f64 {
        2.0 * self.edges.len() as f64 / self.n as f64
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn is_connected(&self) -> bool {
        component_of(self, 0).len() == self.n
    }

    /// Renders the plain-text edge-list format: first line `n <count>`,
    /// then one `i j` line per edge with `i < j`, LF-terminated.
    pub fn to_edge_list_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n {}", self.n);
        for &(i, j) in &self.edges {
            let _ = writeln!(out, "{i} {j}");
        }
        out
    }

    pub fn write_edge_list(&self, path: impl AsRef<Path>) -> Result<(), GraphError> {
        std::fs::write(path, self.to_edge_list_string())?;
        Ok(())
    }

    /// Parses the edge-list format, rejecting self-loops, duplicates,
    /// reversed pairs and out-of-range endpoints.
    pub fn parse_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(GraphError::MalformedEdgeList {
            line: 1,
            reason: "empty file".into(),
        })?;
        let n = match header.split_whitespace().collect::<Vec<_>>()[..] {
            ["n", count] => count
                .parse::<usize>()
                .map_err(|e| GraphError::MalformedEdgeList {
                    line: 1,
                    reason: format!("bad node count: {e}"),
                })?,
            _ => {
                return Err(GraphError::MalformedEdgeList {
                    line: 1,
                    reason: "expected header `n <count>`".into(),
                })
            }
        };
        let mut edges = Vec::new();
        for (idx, line) in lines {
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [a, b] = fields[..] else {
                return Err(GraphError::MalformedEdgeList {
                    line: lineno,
                    reason: "expected `i j`".into(),
                });
            };
            let parse = |s: &str| {
                s.parse::<usize>().map_err(|e| GraphError::MalformedEdgeList {
                    line: lineno,
                    reason: format!("bad node index: {e}"),
                })
            };
            let (i, j) = (parse(a)?, parse(b)?);
            if i >= j {
                return Err(GraphError::MalformedEdgeList {
                    line: lineno,
                    reason: format!("require i < j, got {i} {j}"),
                });
            }
            edges.push((i, j));
        }
        Graph::from_edges(n, edges).map_err(|e| match e {
            GraphError::InvalidParameter(reason) => GraphError::MalformedEdgeList {
                line: 0,
                reason,
            },
            other => other,
        })
    }

    pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Self, GraphError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_edge_list(&text)
    }
}

/// Erdős–Rényi graph: each of the `n(n-1)/2` node pairs is included
/// independently with probability `p_er`.
///
/// Draw order: pairs `(i, j)` with `i < j` are scanned lexicographically;
/// one uniform `f64` is drawn per pair, and the edge is kept when it falls
/// below `p_er`.
pub fn gen_erdos_renyi(n: usize, p_er: f64, seed: u64) -> Result<Graph, GraphError> {
    if n == 0 {
        return Err(GraphError::InvalidParameter(
            "node count must be positive".into(),
        ));
    }
    if !(p_er > 0.0 && p_er < 1.0) {
        return Err(GraphError::InvalidParameter(format!(
            "edge probability must lie in (0, 1), got {p_er}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < p_er {
                edges.push((i, j));
            }
        }
    }
    Graph::from_edges(n, edges)
}

/// Geometric graph on the unit torus: `n` points uniform on `[0,1)^2`,
/// edge iff wrap-around Euclidean distance is below `r`.
///
/// Draw order: for each node in index order, the x coordinate then the y
/// coordinate.
pub fn gen_geometric_torus(n: usize, r: f64, seed: u64) -> Result<Graph, GraphError> {
    if n == 0 {
        return Err(GraphError::InvalidParameter(
            "node count must be positive".into(),
        ));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(GraphError::InvalidParameter(format!(
            "radius must lie in (0, 1), got {r}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let points: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let x = rng.gen::<f64>();
            let y = rng.gen::<f64>();
            (x, y)
        })
        .collect();
    geometric_torus_from_points(&points, r)
}

/// Builds the torus geometric graph for explicitly placed points.
pub fn geometric_torus_from_points(points: &[(f64, f64)], r: f64) -> Result<Graph, GraphError> {
    if points.is_empty() {
        return Err(GraphError::InvalidParameter(
            "node count must be positive".into(),
        ));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(GraphError::InvalidParameter(format!(
            "radius must lie in (0, 1), got {r}"
        )));
    }
    let n = points.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if torus_distance(points[i], points[j]) < r {
                edges.push((i, j));
            }
        }
    }
    Graph::from_edges(n, edges)
}

/// Wrap-around Euclidean distance on the unit torus.
pub fn torus_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    let wrap = |d: f64| {
        let d = d.abs();
        d.min(1.0 - d)
    };
    let dx = wrap(a.0 - b.0);
    let dy = wrap(a.1 - b.1);
    (dx * dx + dy * dy).sqrt()
}

/// Preferential-attachment graph: starts from a complete graph on `m`
/// nodes; each arriving node attaches to `m` distinct existing nodes
/// chosen with probability proportional to current degree.
///
/// Draw order: arrivals in node order. Each target is drawn by indexing a
/// multiset that lists every node once per unit of degree; a draw that
/// repeats an already chosen target for the same arrival is rejected and
/// redrawn. While the multiset is empty (only possible for `m = 1` before
/// the first attachment) the target is drawn uniformly over existing nodes.
/// Degrees are updated after all `m` targets of an arrival are fixed.
pub fn gen_preferential_attachment(n: usize, m: usize, seed: u64) -> Result<Graph, GraphError> {
    if m == 0 {
        return Err(GraphError::InvalidParameter(
            "links per arrival must be positive".into(),
        ));
    }
    if n < m {
        return Err(GraphError::InvalidParameter(format!(
            "need n >= m, got n = {n}, m = {m}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            edges.push((i, j));
        }
    }
    let mut endpoints: Vec<usize> = Vec::with_capacity(2 * (edges.len() + m * (n - m)));
    for &(i, j) in &edges {
        endpoints.push(i);
        endpoints.push(j);
    }
    for v in m..n {
        let mut targets: Vec<usize> = Vec::with_capacity(m);
        while targets.len() < m {
            let candidate = if endpoints.is_empty() {
                rng.gen_range(0..v)
            } else {
                endpoints[rng.gen_range(0..endpoints.len())]
            };
            if !targets.contains(&candidate) {
                targets.push(candidate);
            }
        }
        for &t in &targets {
            edges.push((t, v));
            endpoints.push(t);
            endpoints.push(v);
        }
    }
    Graph::from_edges(n, edges)
}

/// Derives a social network from a contact network by rewiring a fraction
/// `p` of its edges.
///
/// Procedure: remove `floor(p * |E|)` edges chosen uniformly without
/// replacement; for each removed edge pick one endpoint uniformly as the
/// root; add an edge from the root to a node drawn uniformly at random,
/// redrawing whenever the draw is the root itself or an edge that already
/// exists. A root that is already adjacent to every other node cannot
/// accept an edge, so the other endpoint of the removed edge takes over
/// as root (an error is returned if both are saturated). The output has
/// exactly as many edges as the input; `p = 0` returns a graph equal to
/// the input.
///
/// Draw order: a Fisher–Yates shuffle of the edge indices (swapping from
/// the back, `gen_range(0..=i)` per position) whose first `floor(p*|E|)`
/// entries are the removed edges, processed in that order; per removed
/// edge one draw in `{0, 1}` for the root endpoint, then uniform node
/// draws until the new edge is valid.
pub fn rewire_social(contact: &Graph, p: f64, seed: u64) -> Result<Graph, GraphError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(GraphError::InvalidParameter(format!(
            "rewire fraction must lie in [0, 1], got {p}"
        )));
    }
    if contact.edge_count() == 0 {
        return Err(GraphError::InvalidParameter(
            "contact graph must have at least one edge".into(),
        ));
    }
    let n = contact.n();
    let m = contact.edge_count();
    let k = (p * m as f64).floor() as usize;
    let mut rng = rng_from_seed(seed);

    let mut order: Vec<usize> = (0..m).collect();
    for i in (1..m).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let removed: Vec<(usize, usize)> = order[..k].iter().map(|&e| contact.edges()[e]).collect();

    let mut set: HashSet<(usize, usize)> = contact.edges().iter().copied().collect();
    for e in &removed {
        set.remove(e);
    }
    let mut degree: Vec<usize> = (0..n).map(|i| contact.degree(i)).collect();
    for &(a, b) in &removed {
        degree[a] -= 1;
        degree[b] -= 1;
    }

    for &(a, b) in &removed {
        let (drawn, other) = if rng.gen_range(0..2u8) == 0 {
            (a, b)
        } else {
            (b, a)
        };
        let root = if degree[drawn] < n - 1 { drawn } else { other };
        if degree[root] == n - 1 {
            return Err(GraphError::InvalidParameter(format!(
                "both endpoints of removed edge ({a}, {b}) are adjacent to every other node"
            )));
        }
        loop {
            let j = rng.gen_range(0..n);
            if j == root {
                continue;
            }
            let e = (root.min(j), root.max(j));
            if set.insert(e) {
                degree[root] += 1;
                degree[j] += 1;
                break;
            }
        }
    }
    Graph::from_edges(n, set)
}

/// Largest eigenvalue of the adjacency matrix by power iteration.
///
/// Iterates on `A + dI` with `d` the maximum degree so that the dominant
/// eigenvalue stays strictly largest in magnitude on bipartite graphs, and
/// reports the Rayleigh quotient with respect to `A` itself. Converges
/// when successive Rayleigh quotients differ by less than `tol`.
pub fn spectral_radius(g: &Graph, tol: f64, max_iter: usize) -> Result<f64, GraphError> {
    if tol <= 0.0 {
        return Err(GraphError::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if g.edge_count() == 0 {
        return Ok(0.0);
    }
    let n = g.n();
    let shift = g.max_degree() as f64;
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut y = vec![0.0; n];
    let mut prev = f64::INFINITY;
    for _ in 0..max_iter {
        for i in 0..n {
            let mut acc = shift * x[i];
            for &j in g.neighbors(i) {
                acc += x[j];
            }
            y[i] = acc;
        }
        // x is unit, so x . y - shift is the Rayleigh quotient for A
        let rq = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() - shift;
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        for i in 0..n {
            x[i] = y[i] / norm;
        }
        if (rq - prev).abs() < tol {
            return Ok(rq);
        }
        prev = rq;
    }
    Err(GraphError::NoConvergence {
        max_iter,
        last: prev,
    })
}

/// Induced subgraph on the largest connected component, nodes relabeled to
/// `0..k` preserving original index order. Ties between equal-sized
/// components go to the one containing the smallest original index; that
/// component always exists because node counts are positive.
pub fn largest_connected_component(g: &Graph) -> Graph {
    let mut visited = vec![false; g.n()];
    let mut best: Vec<usize> = Vec::new();
    for start in 0..g.n() {
        if visited[start] {
            continue;
        }
        let comp = component_of(g, start);
        for &v in &comp {
            visited[v] = true;
        }
        // components are discovered in order of smallest member, so a
        // strict size comparison implements the tie-break
        if comp.len() > best.len() {
            best = comp;
        }
    }
    best.sort_unstable();
    let relabel: std::collections::HashMap<usize, usize> = best
        .iter()
        .enumerate()
        .map(|(new, &old)| (old, new))
        .collect();
    let edges = g
        .edges()
        .iter()
        .filter(|(i, j)| relabel.contains_key(i) && relabel.contains_key(j))
        .map(|(i, j)| (relabel[i], relabel[j]));
    Graph::from_edges(best.len(), edges).expect("induced subgraph is valid")
}

fn component_of(g: &Graph, start: usize) -> Vec<usize> {
    let mut seen = vec![false; g.n()];
    let mut stack = vec![start];
    let mut comp = Vec::new();
    seen[start] = true;
    while let Some(v) = stack.pop() {
        comp.push(v);
        for &w in g.neighbors(v) {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    comp
}
