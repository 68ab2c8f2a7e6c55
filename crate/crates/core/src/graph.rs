//! Undirected weighted simple graphs, the edge-list text format, and the
//! residual view used while edges are being deleted.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Position of an edge in its graph's edge list. Stable for the graph's lifetime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeId(pub usize);

impl EdgeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// An edge with fixed orientation `u < v`; its incidence vector is `e_u - e_v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

impl Edge {
    pub fn other(&self, x: usize) -> usize {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// Immutable undirected simple graph with strictly positive edge weights.
///
/// Node ids are `0..n`. `labels` keeps the identifiers the graph was read with so
/// results can be reported in the input's own naming.
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, EdgeId)>>,
    labels: Vec<String>,
}

impl Graph {
    /// Builds a graph from `(u, v, w)` triples over nodes `0..n`.
    ///
    /// Endpoints are reoriented so that `u < v`. Self-loops, duplicate unordered
    /// pairs, out-of-range ids and non-positive or non-finite weights are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut builder = GraphBuilder::with_nodes(n);
        for (i, &(u, v, w)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::Validation(format!(
                    "edge {i} ({u}, {v}) has an endpoint outside 0..{n}"
                )));
            }
            builder.push(u, v, w).map_err(|e| match e {
                Error::Validation(msg) => Error::Validation(format!("edge {i}: {msg}")),
                other => other,
            })?;
        }
        Ok(builder.finish())
    }

    /// Unit-weight convenience constructor.
    pub fn from_unweighted(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let triples: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 1.0)).collect();
        Self::from_edges(n, &triples)
    }

    /// `n` isolated nodes.
    pub fn empty(n: usize) -> Self {
        GraphBuilder::with_nodes(n).finish()
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len()).map(EdgeId)
    }

    /// Neighbours of `u` together with the connecting edge.
    pub fn neighbors(&self, u: usize) -> &[(usize, EdgeId)] {
        &self.adjacency[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adjacency[u].len()
    }

    pub fn label(&self, u: usize) -> &str {
        &self.labels[u]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Looks up the edge joining `a` and `b`, in either order.
    pub fn find_edge(&self, a: usize, b: usize) -> Option<EdgeId> {
        if a >= self.n || b >= self.n {
            return None;
        }
        let (small, other) = if self.adjacency[a].len() <= self.adjacency[b].len() {
            (a, b)
        } else {
            (b, a)
        };
        self.adjacency[small]
            .iter()
            .find(|(x, _)| *x == other)
            .map(|&(_, e)| e)
    }

    pub fn max_weight(&self) -> Option<f64> {
        self.edges.iter().map(|e| e.weight).reduce(f64::max)
    }

    pub fn min_weight(&self) -> Option<f64> {
        self.edges.iter().map(|e| e.weight).reduce(f64::min)
    }

    /// Node partition into connected components, each sorted, ordered by
    /// smallest member.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        ResidualGraph::full(self).connected_components()
    }

    /// Writes the graph in the edge-list format accepted by [`parse_edge_list`].
    ///
    /// Isolated nodes have no line of their own and are therefore not preserved.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        for e in &self.edges {
            writeln!(out, "{} {} {}", self.labels[e.u], self.labels[e.v], e.weight)?;
        }
        Ok(())
    }
}

struct GraphBuilder {
    n: usize,
    edges: Vec<Edge>,
    seen: HashSet<(usize, usize)>,
    labels: Vec<String>,
}

impl GraphBuilder {
    fn with_nodes(n: usize) -> Self {
        Self {
            n,
            edges: Vec::new(),
            seen: HashSet::new(),
            labels: (0..n).map(|i| i.to_string()).collect(),
        }
    }

    fn push(&mut self, a: usize, b: usize, w: f64) -> Result<()> {
        if a == b {
            return Err(Error::Validation(format!("self-loop on node {a}")));
        }
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::Validation(format!(
                "weight {w} on ({a}, {b}) is not strictly positive"
            )));
        }
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        if !self.seen.insert((u, v)) {
            return Err(Error::Validation(format!("duplicate edge ({a}, {b})")));
        }
        self.edges.push(Edge { u, v, weight: w });
        Ok(())
    }

    fn finish(self) -> Graph {
        let mut adjacency = vec![Vec::new(); self.n];
        for (i, e) in self.edges.iter().enumerate() {
            adjacency[e.u].push((e.v, EdgeId(i)));
            adjacency[e.v].push((e.u, EdgeId(i)));
        }
        Graph {
            n: self.n,
            edges: self.edges,
            adjacency,
            labels: self.labels,
        }
    }
}

/// Parses a whitespace-separated edge list: one `u v [w]` record per line.
///
/// Lines starting with `#` or `%` are comments (SNAP and KONECT headers); blank
/// lines are skipped; columns after the weight are ignored. Node identifiers are
/// arbitrary tokens, compacted to `0..n` in order of first appearance.
pub fn parse_edge_list<R: BufRead>(input: R) -> Result<Graph> {
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    let mut triples: Vec<(usize, usize, f64, usize)> = Vec::new();

    for (idx, line) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let (a, b) = match (tokens.next(), tokens.next()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::parse(lineno, "expected `u v [w]`")),
        };
        let w = match tokens.next() {
            None => 1.0,
            Some(tok) => tok
                .parse::<f64>()
                .map_err(|_| Error::parse(lineno, format!("bad weight `{tok}`")))?,
        };
        let mut intern = |tok: &str| -> usize {
            if let Some(&id) = ids.get(tok) {
                return id;
            }
            let id = labels.len();
            ids.insert(tok.to_string(), id);
            labels.push(tok.to_string());
            id
        };
        let u = intern(a);
        let v = intern(b);
        triples.push((u, v, w, lineno));
    }

    let mut builder = GraphBuilder::with_nodes(labels.len());
    builder.labels = labels;
    for (u, v, w, lineno) in triples {
        builder.push(u, v, w).map_err(|e| match e {
            Error::Validation(msg) => Error::Validation(format!("line {lineno}: {msg}")),
            other => other,
        })?;
    }
    Ok(builder.finish())
}

/// Convenience wrapper over [`parse_edge_list`] for in-memory text.
pub fn parse_edge_list_str(text: &str) -> Result<Graph> {
    parse_edge_list(text.as_bytes())
}

/// A graph with some of its edges deleted.
///
/// Edge ids keep referring to the base graph, so picks made on a residual graph
/// can be reported against the original input.
#[derive(Debug, Clone)]
pub struct ResidualGraph<'g> {
    base: &'g Graph,
    alive: Vec<bool>,
    alive_count: usize,
    degrees: Vec<usize>,
}

impl<'g> ResidualGraph<'g> {
    pub fn full(base: &'g Graph) -> Self {
        Self {
            base,
            alive: vec![true; base.edge_count()],
            alive_count: base.edge_count(),
            degrees: (0..base.node_count()).map(|u| base.degree(u)).collect(),
        }
    }

    pub fn without(base: &'g Graph, removed: &[EdgeId]) -> Result<Self> {
        let mut r = Self::full(base);
        for &e in removed {
            r.remove(e)?;
        }
        Ok(r)
    }

    pub fn base(&self) -> &'g Graph {
        self.base
    }

    pub fn node_count(&self) -> usize {
        self.base.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.alive_count
    }

    pub fn is_alive(&self, e: EdgeId) -> bool {
        self.alive.get(e.0).copied().unwrap_or(false)
    }

    pub fn edge(&self, e: EdgeId) -> &'g Edge {
        self.base.edge(e)
    }

    pub fn remove(&mut self, e: EdgeId) -> Result<()> {
        if !self.is_alive(e) {
            return Err(Error::InvalidArgument(format!(
                "edge {e} is not present in the current graph"
            )));
        }
        let edge = self.base.edge(e);
        self.alive[e.0] = false;
        self.alive_count -= 1;
        self.degrees[edge.u] -= 1;
        self.degrees[edge.v] -= 1;
        Ok(())
    }

    /// Surviving edge ids in ascending order.
    pub fn alive_ids(&self) -> Vec<EdgeId> {
        self.alive
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(|(i, _)| EdgeId(i))
            .collect()
    }

    pub fn alive_edges(&self) -> impl Iterator<Item = (EdgeId, &'g Edge)> + '_ {
        let base = self.base;
        self.alive
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(move |(i, _)| (EdgeId(i), base.edge(EdgeId(i))))
    }

    pub fn removed_ids(&self) -> Vec<EdgeId> {
        self.alive
            .iter()
            .enumerate()
            .filter(|(_, &a)| !a)
            .map(|(i, _)| EdgeId(i))
            .collect()
    }

    /// Current unweighted degree.
    pub fn degree(&self, u: usize) -> usize {
        self.degrees[u]
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = (usize, EdgeId)> + '_ {
        self.base.neighbors(u).iter().copied().filter(|&(_, e)| self.alive[e.0])
    }

    pub fn max_weight(&self) -> Option<f64> {
        self.alive_edges().map(|(_, e)| e.weight).reduce(f64::max)
    }

    pub fn min_weight(&self) -> Option<f64> {
        self.alive_edges().map(|(_, e)| e.weight).reduce(f64::min)
    }

    /// Union-find over surviving edges.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let n = self.node_count();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (_, e) in self.alive_edges() {
            let a = find(&mut parent, e.u);
            let b = find(&mut parent, e.v);
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut slot: HashMap<usize, usize> = HashMap::new();
        for u in 0..n {
            let root = find(&mut parent, u);
            let idx = *slot.entry(root).or_insert_with(|| {
                groups.push(Vec::new());
                groups.len() - 1
            });
            groups[idx].push(u);
        }
        groups
    }

    /// Materializes the residual as a standalone graph (edge ids are renumbered).
    pub fn to_graph(&self) -> Graph {
        let mut b = GraphBuilder::with_nodes(self.node_count());
        b.labels = self.base.labels.clone();
        for (_, e) in self.alive_edges() {
            b.edges.push(*e);
        }
        b.finish()
    }
}
