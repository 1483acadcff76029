//! The product `G □ K₂`: two copies of `G` joined by the copy matching.
//!
//! Vertex `v` of the first copy keeps index `v`; its twin is `n + v`.
//! Edge ids are laid out as the original edges (class `Original`), then their
//! copies (class `Copy`), then the `n` rungs `(v, n + v)` (class `Rung`).

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, Matching, VertexSubset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeClass {
    /// An edge of the first copy of `G`.
    Original,
    /// An edge of the second copy (`E′`).
    Copy,
    /// A rung `(v, v′)` joining a vertex to its twin (`E₀`).
    Rung,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Layer {
    First,
    Second,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductGraph {
    graph: Graph,
    base_vertex_count: usize,
    base_edge_count: usize,
}

impl ProductGraph {
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// Number of vertices of the base graph `G`.
    pub fn base_vertex_count(&self) -> usize {
        self.base_vertex_count
    }

    pub fn base_edge_count(&self) -> usize {
        self.base_edge_count
    }

    /// Original vertex and layer of product vertex `x`.
    pub fn origin(&self, x: usize) -> (usize, Layer) {
        let n = self.base_vertex_count;
        if x < n {
            (x, Layer::First)
        } else {
            (x - n, Layer::Second)
        }
    }

    pub fn twin(&self, x: usize) -> usize {
        let n = self.base_vertex_count;
        if x < n {
            x + n
        } else {
            x - n
        }
    }

    pub fn edge_class(&self, id: EdgeId) -> EdgeClass {
        let m = self.base_edge_count;
        if id < m {
            EdgeClass::Original
        } else if id < 2 * m {
            EdgeClass::Copy
        } else {
            EdgeClass::Rung
        }
    }

    /// Multiplies every edge weight by `factor`; edge ids and classes are unchanged.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::InvalidInput(format!(
                "weight factor must be positive, got {factor}"
            )));
        }
        Ok(Self {
            graph: self.graph.reweighted(|_, e| e.weight * factor)?,
            ..*self
        })
    }
}

/// Builds `G □ K₂` with weight `c²` on both copies of `G` and 1 on the rungs.
///
/// The input graph's own weights are ignored: the target counts perfect
/// matchings of induced subgraphs, so only the edge set of `g` matters.
pub fn cartesian_product_k2(g: &Graph, c: f64) -> Result<ProductGraph> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidInput(format!("c must be positive, got {c}")));
    }
    let n = g.vertex_count();
    let c2 = c * c;
    let mut p = Graph::new(2 * n);
    for e in g.edges() {
        p.add_edge(e.u, e.v, c2)?;
    }
    for e in g.edges() {
        p.add_edge(n + e.u, n + e.v, c2)?;
    }
    for v in 0..n {
        p.add_edge(v, n + v, 1.0)?;
    }
    Ok(ProductGraph {
        graph: p,
        base_vertex_count: n,
        base_edge_count: g.edge_count(),
    })
}

/// Vertices of `G` covered by first-copy edges of a perfect matching of the product.
pub fn project_to_subset(pg: &ProductGraph, pm: &Matching) -> Result<VertexSubset> {
    pm.ensure_perfect(pg.graph())?;
    Ok(VertexSubset::new(
        pm.edges()
            .iter()
            .filter(|&&id| pg.edge_class(id) == EdgeClass::Original)
            .flat_map(|&id| {
                let e = pg.graph().edge(id);
                [e.u, e.v]
            }),
    ))
}

/// Vertices of `G` whose twins are covered by second-copy edges.
pub fn project_copy_layer(pg: &ProductGraph, pm: &Matching) -> Result<VertexSubset> {
    pm.ensure_perfect(pg.graph())?;
    Ok(VertexSubset::new(
        pm.edges()
            .iter()
            .filter(|&&id| pg.edge_class(id) == EdgeClass::Copy)
            .flat_map(|&id| {
                let e = pg.graph().edge(id);
                [pg.origin(e.u).0, pg.origin(e.v).0]
            }),
    ))
}

pub(crate) fn subset_from_original_edges(
    pg: &ProductGraph,
    edges: impl Iterator<Item = EdgeId>,
) -> Vec<usize> {
    let mut out: Vec<usize> = edges
        .filter(|&id| pg.edge_class(id) == EdgeClass::Original)
        .flat_map(|id| {
            let e = pg.graph().edge(id);
            [e.u, e.v]
        })
        .collect();
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k2_product_is_four_cycle() {
        let pg = cartesian_product_k2(&Graph::complete(2), 1.0).unwrap();
        let g = pg.graph();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.edge_count(), 4);
        assert!(g.edges().iter().all(|e| e.weight == 1.0));
        assert!((0..4).all(|v| g.degree(v) == 2));
        assert!(g.is_connected());
    }

    #[test]
    fn path_product_counts_and_weights() {
        let pg = cartesian_product_k2(&Graph::path(3), 0.5).unwrap();
        let g = pg.graph();
        assert_eq!(g.vertex_count(), 6);
        assert_eq!(g.edge_count(), 7);
        let quarter = (0..7)
            .filter(|&id| g.edge(id).weight == 0.25)
            .inspect(|&id| assert_ne!(pg.edge_class(id), EdgeClass::Rung))
            .count();
        let unit = (0..7)
            .filter(|&id| g.edge(id).weight == 1.0)
            .inspect(|&id| assert_eq!(pg.edge_class(id), EdgeClass::Rung))
            .count();
        assert_eq!((quarter, unit), (4, 3));
    }

    #[test]
    fn empty_graph_product_is_all_rungs() {
        let pg = cartesian_product_k2(&Graph::new(4), 2.0).unwrap();
        assert_eq!(pg.graph().vertex_count(), 8);
        assert_eq!(pg.graph().edge_count(), 4);
        for id in 0..4 {
            assert_eq!(pg.edge_class(id), EdgeClass::Rung);
            assert_eq!(pg.graph().edge(id).weight, 1.0);
        }
    }

    #[test]
    fn rejects_non_positive_c() {
        assert!(cartesian_product_k2(&Graph::complete(2), 0.0).is_err());
        assert!(cartesian_product_k2(&Graph::complete(2), -1.0).is_err());
        assert!(cartesian_product_k2(&Graph::complete(2), f64::NAN).is_err());
    }

    #[test]
    fn projection_of_c4_matchings() {
        let pg = cartesian_product_k2(&Graph::complete(2), 1.0).unwrap();
        let g = pg.graph();
        let rungs = Matching::from_pairs(g, &[(0, 2), (1, 3)]).unwrap();
        assert!(project_to_subset(&pg, &rungs).unwrap().is_empty());
        let copies = Matching::from_pairs(g, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(project_to_subset(&pg, &copies).unwrap().members(), &[0, 1]);
        let partial = Matching::from_pairs(g, &[(0, 1)]).unwrap();
        assert_eq!(
            project_to_subset(&pg, &partial),
            Err(Error::NotPerfect { unmatched: 2 })
        );
    }

    #[test]
    fn origin_and_twin_are_consistent() {
        let pg = cartesian_product_k2(&Graph::cycle(5), 1.0).unwrap();
        for x in 0..10 {
            let (v, layer) = pg.origin(x);
            assert_eq!(pg.twin(pg.twin(x)), x);
            assert_eq!(pg.origin(pg.twin(x)).0, v);
            assert_eq!(layer == Layer::First, x < 5);
        }
        for id in 0..pg.graph().edge_count() {
            let e = pg.graph().edge(id);
            match pg.edge_class(id) {
                EdgeClass::Original => assert!(e.u < 5 && e.v < 5),
                EdgeClass::Copy => assert!(e.u >= 5 && e.v >= 5),
                EdgeClass::Rung => assert_eq!(pg.twin(e.u), e.v),
            }
        }
    }
}
