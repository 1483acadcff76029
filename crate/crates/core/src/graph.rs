//! Weighted simple graphs, matchings and vertex subsets.
//!
//! Vertices are dense indices `0..n`. Edges are stored once, as `(u, v)` with
//! `u < v` unless a caller (such as a bipartite construction) fixes the
//! orientation; the edge index is the identity used by the chains.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub type EdgeId = usize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

impl Edge {
    #[inline]
    pub fn other(&self, x: usize) -> usize {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }

    #[inline]
    pub fn touches(&self, x: usize) -> bool {
        self.u == x || self.v == x
    }
}

/// Undirected simple graph with strictly positive edge weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, EdgeId)>>,
}

impl Graph {
    pub fn new(vertex_count: usize) -> Self {
        Self {
            vertex_count,
            edges: Vec::new(),
            adjacency: alloc::vec![Vec::new(); vertex_count],
        }
    }

    /// Builds a graph from `(u, v, weight)` triples.
    pub fn from_edges(
        vertex_count: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut g = Self::new(vertex_count);
        for (u, v, w) in edges {
            g.add_edge(u, v, w)?;
        }
        Ok(g)
    }

    /// Unit-weight graph from vertex pairs.
    pub fn unweighted(
        vertex_count: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        Self::from_edges(vertex_count, pairs.into_iter().map(|(u, v)| (u, v, 1.0)))
    }

    pub fn complete(n: usize) -> Self {
        let pairs = (0..n).flat_map(|u| ((u + 1)..n).map(move |v| (u, v)));
        Self::unweighted(n, pairs).expect("complete graph is simple")
    }

    pub fn path(n: usize) -> Self {
        Self::unweighted(n, (1..n).map(|v| (v - 1, v))).expect("path is simple")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "a simple cycle needs at least 3 vertices");
        Self::unweighted(n, (0..n).map(|v| (v, (v + 1) % n))).expect("cycle is simple")
    }

    /// Adds an edge and returns its id. The stored orientation is `(u, v)` as given.
    pub fn add_edge(&mut self, u: usize, v: usize, weight: f64) -> Result<EdgeId> {
        if u >= self.vertex_count || v >= self.vertex_count {
            return Err(Error::InvalidGraph(format!(
                "edge ({u}, {v}) references a vertex outside 0..{}",
                self.vertex_count
            )));
        }
        if u == v {
            return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
        }
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::InvalidGraph(format!(
                "edge ({u}, {v}) has weight {weight}; weights must be finite and positive"
            )));
        }
        if self.edge_between(u, v).is_some() {
            return Err(Error::InvalidGraph(format!("duplicate edge ({u}, {v})")));
        }
        let id = self.edges.len();
        self.edges.push(Edge { u, v, weight });
        self.adjacency[u].push((v, id));
        self.adjacency[v].push((u, id));
        Ok(id)
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    #[inline]
    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    /// `(neighbour, edge id)` pairs incident to `v`.
    #[inline]
    pub fn neighbors(&self, v: usize) -> &[(usize, EdgeId)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn edge_between(&self, u: usize, v: usize) -> Option<EdgeId> {
        let (a, b) = if self.adjacency[u].len() <= self.adjacency[v].len() {
            (u, v)
        } else {
            (v, u)
        };
        self.adjacency[a]
            .iter()
            .find(|&&(w, _)| w == b)
            .map(|&(_, id)| id)
    }

    /// Largest weight, floored at 1 (the `max(1, λ_e)` bound used by step counts).
    pub fn max_weight_or_one(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).fold(1.0, f64::max)
    }

    /// A copy with every weight replaced by `f(edge id, edge)`.
    pub fn reweighted(&self, mut f: impl FnMut(EdgeId, &Edge) -> f64) -> Result<Self> {
        let mut g = Self::new(self.vertex_count);
        for (id, e) in self.edges.iter().enumerate() {
            g.add_edge(e.u, e.v, f(id, e))?;
        }
        Ok(g)
    }

    /// 0/1 adjacency matrix (weights ignored).
    pub fn adjacency_matrix(&self) -> crate::Matrix {
        let mut a = crate::Matrix::zeros(self.vertex_count, self.vertex_count);
        for e in &self.edges {
            a.set(e.u, e.v, 1.0);
            a.set(e.v, e.u, 1.0);
        }
        a
    }

    /// Weighted adjacency matrix.
    pub fn weight_matrix(&self) -> crate::Matrix {
        let mut a = crate::Matrix::zeros(self.vertex_count, self.vertex_count);
        for e in &self.edges {
            a.set(e.u, e.v, e.weight);
            a.set(e.v, e.u, e.weight);
        }
        a
    }

    pub fn is_connected(&self) -> bool {
        if self.vertex_count == 0 {
            return true;
        }
        let mut seen = alloc::vec![false; self.vertex_count];
        let mut stack = alloc::vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for &(y, _) in &self.adjacency[x] {
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        count == self.vertex_count
    }

    /// Induced subgraph on `vertices`, relabelled `0..vertices.len()` in the given order.
    pub fn induced(&self, vertices: &[usize]) -> Self {
        let mut index = alloc::vec![usize::MAX; self.vertex_count];
        for (i, &v) in vertices.iter().enumerate() {
            index[v] = i;
        }
        let mut g = Self::new(vertices.len());
        for e in &self.edges {
            if index[e.u] != usize::MAX && index[e.v] != usize::MAX {
                g.add_edge(index[e.u], index[e.v], e.weight)
                    .expect("induced subgraph of a simple graph is simple");
            }
        }
        g
    }
}

/// A set of vertex-disjoint edges of some graph, kept as sorted edge ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching {
    edges: Vec<EdgeId>,
}

impl Matching {
    pub fn empty() -> Self {
        Self { edges: Vec::new() }
    }

    /// Validates that `edges` is a matching of `g`.
    pub fn new(g: &Graph, edges: impl IntoIterator<Item = EdgeId>) -> Result<Self> {
        let mut ids: Vec<EdgeId> = edges.into_iter().collect();
        ids.sort_unstable();
        ids.dedup();
        let mut used = alloc::vec![false; g.vertex_count()];
        for &id in &ids {
            if id >= g.edge_count() {
                return Err(Error::InvalidInput(format!("edge id {id} not in graph")));
            }
            let e = g.edge(id);
            if used[e.u] || used[e.v] {
                return Err(Error::InvalidInput(format!(
                    "edges share an endpoint at edge ({}, {})",
                    e.u, e.v
                )));
            }
            used[e.u] = true;
            used[e.v] = true;
        }
        Ok(Self { edges: ids })
    }

    /// Builds a matching from vertex pairs, looking up each edge in `g`.
    pub fn from_pairs(g: &Graph, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut ids = Vec::with_capacity(pairs.len());
        for &(u, v) in pairs {
            let id = g
                .edge_between(u, v)
                .ok_or_else(|| Error::InvalidInput(format!("({u}, {v}) is not an edge")))?;
            ids.push(id);
        }
        Self::new(g, ids)
    }

    pub(crate) fn from_sorted_unchecked(edges: Vec<EdgeId>) -> Self {
        debug_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        Self { edges }
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, id: EdgeId) -> bool {
        self.edges.binary_search(&id).is_ok()
    }

    /// Number of vertices of `g` left uncovered.
    pub fn unmatched_count(&self, g: &Graph) -> usize {
        g.vertex_count() - 2 * self.edges.len()
    }

    pub fn is_perfect(&self, g: &Graph) -> bool {
        self.unmatched_count(g) == 0
    }

    pub fn is_near_perfect(&self, g: &Graph) -> bool {
        self.unmatched_count(g) == 2
    }

    /// Product of edge weights (1 for the empty matching).
    pub fn weight(&self, g: &Graph) -> f64 {
        self.edges.iter().map(|&id| g.edge(id).weight).product()
    }

    /// Vertices not covered by the matching, ascending.
    pub fn unmatched(&self, g: &Graph) -> Vec<usize> {
        let mut used = alloc::vec![false; g.vertex_count()];
        for &id in &self.edges {
            used[g.edge(id).u] = true;
            used[g.edge(id).v] = true;
        }
        (0..g.vertex_count()).filter(|&v| !used[v]).collect()
    }

    pub fn pairs(&self, g: &Graph) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .map(|&id| {
                let e = g.edge(id);
                (e.u.min(e.v), e.u.max(e.v))
            })
            .collect()
    }

    pub(crate) fn ensure_perfect(&self, g: &Graph) -> Result<()> {
        let unmatched = self.unmatched_count(g);
        if unmatched == 0 {
            Ok(())
        } else {
            Err(Error::NotPerfect { unmatched })
        }
    }
}

/// A set of vertices, stored sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct VertexSubset {
    members: Vec<usize>,
}

impl VertexSubset {
    pub fn new(members: impl IntoIterator<Item = usize>) -> Self {
        let set: BTreeSet<usize> = members.into_iter().collect();
        Self {
            members: set.into_iter().collect(),
        }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.members
    }
}
