//! Bipartite views of graphs: side assignment, biadjacency matrices and
//! perfect-matching search.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, Matching};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// A graph together with a proper two-colouring. Every stored edge is
/// oriented `(left, right)`; edge ids match the source graph.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteGraph {
    graph: Graph,
    side: Vec<Side>,
    left: Vec<usize>,
    right: Vec<usize>,
    position: Vec<usize>,
}

impl BipartiteGraph {
    /// Uses the given side assignment, rejecting edges inside one side.
    pub fn from_sides(g: &Graph, side: Vec<Side>) -> Result<Self> {
        if side.len() != g.vertex_count() {
            return Err(Error::Dimension(format!(
                "side map has {} entries for {} vertices",
                side.len(),
                g.vertex_count()
            )));
        }
        let mut oriented = Graph::new(g.vertex_count());
        for e in g.edges() {
            let (l, r) = match (side[e.u], side[e.v]) {
                (Side::Left, Side::Right) => (e.u, e.v),
                (Side::Right, Side::Left) => (e.v, e.u),
                _ => {
                    return Err(Error::InvalidGraph(format!(
                        "edge ({}, {}) does not cross the bipartition",
                        e.u, e.v
                    )))
                }
            };
            oriented.add_edge(l, r, e.weight)?;
        }
        let mut left = Vec::new();
        let mut right = Vec::new();
        let mut position = alloc::vec![0; side.len()];
        for (v, s) in side.iter().enumerate() {
            match s {
                Side::Left => {
                    position[v] = left.len();
                    left.push(v);
                }
                Side::Right => {
                    position[v] = right.len();
                    right.push(v);
                }
            }
        }
        Ok(Self {
            graph: oriented,
            side,
            left,
            right,
            position,
        })
    }

    /// Two-colours `g` by breadth-first search; each component's lowest vertex goes left.
    pub fn from_graph(g: &Graph) -> Result<Self> {
        let n = g.vertex_count();
        let mut side: Vec<Option<Side>> = alloc::vec![None; n];
        for start in 0..n {
            if side[start].is_some() {
                continue;
            }
            side[start] = Some(Side::Left);
            let mut queue = alloc::collections::VecDeque::from([start]);
            while let Some(x) = queue.pop_front() {
                let sx = side[x].expect("queued vertices are coloured");
                let flip = match sx {
                    Side::Left => Side::Right,
                    Side::Right => Side::Left,
                };
                for &(y, _) in g.neighbors(x) {
                    match side[y] {
                        None => {
                            side[y] = Some(flip);
                            queue.push_back(y);
                        }
                        Some(sy) if sy == sx => {
                            return Err(Error::InvalidGraph(format!(
                                "graph is not bipartite: odd cycle through ({x}, {y})"
                            )))
                        }
                        Some(_) => {}
                    }
                }
            }
        }
        Self::from_sides(
            g,
            side.into_iter().map(|s| s.expect("all coloured")).collect(),
        )
    }

    /// Rows become left vertices `0..r`, columns right vertices `r..r+c`; zero entries are non-edges.
    pub fn from_biadjacency(b: &Matrix) -> Result<Self> {
        b.check_non_negative()?;
        let (r, c) = (b.rows(), b.cols());
        let mut g = Graph::new(r + c);
        for i in 0..r {
            for j in 0..c {
                let w = b.get(i, j);
                if w != 0.0 {
                    g.add_edge(i, r + j, w)?;
                }
            }
        }
        let side = (0..r + c)
            .map(|v| if v < r { Side::Left } else { Side::Right })
            .collect();
        Self::from_sides(&g, side)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn side(&self, v: usize) -> Side {
        self.side[v]
    }

    pub fn sides(&self) -> &[Side] {
        &self.side
    }

    pub fn left(&self) -> &[usize] {
        &self.left
    }

    pub fn right(&self) -> &[usize] {
        &self.right
    }

    /// Index of `v` within its own side.
    #[inline]
    pub fn position(&self, v: usize) -> usize {
        self.position[v]
    }

    pub fn is_balanced(&self) -> bool {
        self.left.len() == self.right.len()
    }

    /// Number of vertices on each side; errors if unbalanced.
    pub fn part_size(&self) -> Result<usize> {
        if self.is_balanced() {
            Ok(self.left.len())
        } else {
            Err(Error::InvalidGraph(format!(
                "unbalanced bipartition: {} left, {} right",
                self.left.len(),
                self.right.len()
            )))
        }
    }

    /// Weighted biadjacency matrix (rows: left in order, columns: right in order).
    pub fn biadjacency(&self) -> Matrix {
        let mut b = Matrix::zeros(self.left.len(), self.right.len());
        for e in self.graph.edges() {
            b.set(self.position[e.u], self.position[e.v], e.weight);
        }
        b
    }

    /// Maximum matching by augmenting paths, as `mate[v]` edge ids.
    fn maximum_matching(&self, blocked: &[bool]) -> (Vec<Option<EdgeId>>, usize) {
        let n = self.graph.vertex_count();
        let mut mate: Vec<Option<EdgeId>> = alloc::vec![None; n];
        let mut size = 0;
        let mut visited = alloc::vec![0usize; n];
        let mut stamp = 0;
        for &u in &self.left {
            if blocked[u] {
                continue;
            }
            stamp += 1;
            if self.augment(u, &mut mate, &mut visited, stamp, blocked) {
                size += 1;
            }
        }
        (mate, size)
    }

    fn augment(
        &self,
        root: usize,
        mate: &mut [Option<EdgeId>],
        visited: &mut [usize],
        stamp: usize,
        blocked: &[bool],
    ) -> bool {
        // Iterative DFS over alternating paths: stack of (left vertex, next neighbour index).
        let mut stack: Vec<(usize, usize)> = alloc::vec![(root, 0)];
        let mut via: Vec<EdgeId> = Vec::new();
        while let Some(&mut (u, ref mut next)) = stack.last_mut() {
            let nbrs = self.graph.neighbors(u);
            if *next >= nbrs.len() {
                stack.pop();
                via.pop();
                continue;
            }
            let (v, id) = nbrs[*next];
            *next += 1;
            if blocked[v] || visited[v] == stamp {
                continue;
            }
            visited[v] = stamp;
            via.push(id);
            match mate[v] {
                None => {
                    for &eid in &via {
                        let e = self.graph.edge(eid);
                        mate[e.u] = Some(eid);
                        mate[e.v] = Some(eid);
                    }
                    return true;
                }
                Some(m) => {
                    let w = self.graph.edge(m).u;
                    stack.push((w, 0));
                }
            }
        }
        false
    }

    /// Some perfect matching, if one exists.
    pub fn find_perfect_matching(&self) -> Option<Matching> {
        if !self.is_balanced() {
            return None;
        }
        let blocked = alloc::vec![false; self.graph.vertex_count()];
        let (mate, size) = self.maximum_matching(&blocked);
        if size != self.left.len() {
            return None;
        }
        let ids: Vec<EdgeId> = self.left.iter().filter_map(|&u| mate[u]).collect();
        Some(Matching::new(&self.graph, ids).expect("augmenting paths keep a matching"))
    }

    /// Whether `G − u − v` has a perfect matching (`u` left, `v` right).
    pub fn has_near_perfect_with_holes(&self, u: usize, v: usize) -> bool {
        let mut blocked = alloc::vec![false; self.graph.vertex_count()];
        blocked[u] = true;
        blocked[v] = true;
        let (_, size) = self.maximum_matching(&blocked);
        size + 1 == self.left.len() && self.is_balanced()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colours_even_cycle_and_rejects_odd() {
        let b = BipartiteGraph::from_graph(&Graph::cycle(6)).unwrap();
        assert!(b.is_balanced());
        for e in b.graph().edges() {
            assert_eq!((b.side(e.u), b.side(e.v)), (Side::Left, Side::Right));
        }
        assert!(BipartiteGraph::from_graph(&Graph::cycle(5)).is_err());
    }

    #[test]
    fn finds_perfect_matchings() {
        let b = BipartiteGraph::from_graph(&Graph::path(4)).unwrap();
        let pm = b.find_perfect_matching().unwrap();
        assert!(pm.is_perfect(b.graph()));
        assert_eq!(pm.pairs(b.graph()), alloc::vec![(0, 1), (2, 3)]);
        let star = Graph::unweighted(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        assert!(BipartiteGraph::from_graph(&star)
            .unwrap()
            .find_perfect_matching()
            .is_none());
    }

    #[test]
    fn augmenting_paths_are_followed() {
        // Greedy left-to-right would match 0-4 and strand vertex 1.
        let b = BipartiteGraph::from_biadjacency(
            &Matrix::from_rows(&[
                alloc::vec![1.0, 1.0, 0.0],
                alloc::vec![1.0, 0.0, 0.0],
                alloc::vec![0.0, 1.0, 1.0],
            ])
            .unwrap(),
        )
        .unwrap();
        assert!(b.find_perfect_matching().is_some());
        assert!(b.has_near_perfect_with_holes(0, 5));
        assert!(!b.has_near_perfect_with_holes(0, 3));
    }

    #[test]
    fn biadjacency_round_trips() {
        let m = Matrix::from_rows(&[alloc::vec![2.0, 0.0], alloc::vec![1.5, 3.0]]).unwrap();
        let b = BipartiteGraph::from_biadjacency(&m).unwrap();
        assert_eq!(b.biadjacency(), m);
    }
}
