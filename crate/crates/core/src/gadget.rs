//! The bipartite gadget that turns an `m × n` non-negative matrix into a
//! weighted graph whose perfect matchings encode occupancy vectors.
//!
//! Vertex layout (dense indices):
//!
//! | block | label              | index                       |
//! |-------|--------------------|-----------------------------|
//! | `L₁`  | `v_i^(1)`          | `i`                         |
//! | `R₁`  | `u_{j,t}^(1)`      | `n + j·k + t`               |
//! | `R₂`  | `u_{j,t}^(2)`      | `n + m·k + j·k + t`         |
//! | `L₂`  | `v_i^(2)`          | `n + 2·m·k + i`             |
//!
//! `L₁ ∪ R₂` is the left side and `R₁ ∪ L₂` the right side. Column `i` of the
//! matrix indexes the `v` vertices and row `j` the `u` groups, so the edge
//! `(v_i, u_{j,t})` carries weight `a[j][i]`.

use alloc::format;
use alloc::vec::Vec;

use crate::bipartite::{BipartiteGraph, Side};
use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, Matching};
use crate::matrix::Matrix;

/// Non-negative integer vector with a fixed total (an element of `Φ_{m,n}`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupancyVector(pub Vec<usize>);

impl OccupancyVector {
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

/// All vectors of `modes` non-negative integers summing to `total`, in
/// lexicographically decreasing order (`(total, 0, …)` first).
pub fn occupancy_vectors(modes: usize, total: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, modes: usize, remaining: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() + 1 == modes {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=remaining).rev() {
            prefix.push(first);
            rec(prefix, modes, remaining - first, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if modes == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(&mut Vec::with_capacity(modes), modes, total, &mut out);
    out
}

/// `|Φ_{modes,total}| = C(total + modes − 1, modes − 1)`, saturating.
pub fn occupancy_count(modes: usize, total: usize) -> usize {
    if modes == 0 {
        return usize::from(total == 0);
    }
    let mut acc: u128 = 1;
    for i in 1..modes as u128 {
        acc = acc * (total as u128 + i) / i;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GadgetLabel {
    /// `v_i^(layer)`, one per matrix column.
    Column { column: usize, layer: u8 },
    /// `u_{j,t}^(layer)`, `k` copies per matrix row.
    Row { row: usize, copy: usize, layer: u8 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GadgetEdgeClass {
    /// `E₁`: between `L₁` and `R₁`.
    First,
    /// `E₂`: between `R₂` and `L₂`.
    Second,
    /// `E_R`: `u_{j,t}^(1)` to its twin `u_{j,t}^(2)`.
    Rung,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteGadget {
    bipartite: BipartiteGraph,
    matrix: Matrix,
    k: usize,
    first_edges: usize,
    second_edges: usize,
}

impl BipartiteGadget {
    pub fn graph(&self) -> &Graph {
        self.bipartite.graph()
    }

    pub fn bipartite(&self) -> &BipartiteGraph {
        &self.bipartite
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// Copies per matrix row.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of matrix rows (modes).
    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    /// Number of matrix columns (particles).
    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }

    pub fn part_assignment(&self, v: usize) -> Side {
        self.bipartite.side(v)
    }

    pub fn column_vertex(&self, column: usize, layer: u8) -> usize {
        let (n, mk) = (self.cols(), self.rows() * self.k);
        match layer {
            1 => column,
            _ => n + 2 * mk + column,
        }
    }

    pub fn row_vertex(&self, row: usize, copy: usize, layer: u8) -> usize {
        let (n, mk) = (self.cols(), self.rows() * self.k);
        let offset = row * self.k + copy;
        match layer {
            1 => n + offset,
            _ => n + mk + offset,
        }
    }

    pub fn label(&self, v: usize) -> GadgetLabel {
        let (n, k, mk) = (self.cols(), self.k, self.rows() * self.k);
        if v < n {
            GadgetLabel::Column {
                column: v,
                layer: 1,
            }
        } else if v < n + mk {
            let o = v - n;
            GadgetLabel::Row {
                row: o / k,
                copy: o % k,
                layer: 1,
            }
        } else if v < n + 2 * mk {
            let o = v - n - mk;
            GadgetLabel::Row {
                row: o / k,
                copy: o % k,
                layer: 2,
            }
        } else {
            GadgetLabel::Column {
                column: v - n - 2 * mk,
                layer: 2,
            }
        }
    }

    pub fn edge_class(&self, id: EdgeId) -> GadgetEdgeClass {
        if id < self.first_edges {
            GadgetEdgeClass::First
        } else if id < self.first_edges + self.second_edges {
            GadgetEdgeClass::Second
        } else {
            GadgetEdgeClass::Rung
        }
    }

    /// Row group of an `R₁`/`R₂` vertex.
    pub fn row_of(&self, v: usize) -> Option<usize> {
        match self.label(v) {
            GadgetLabel::Row { row, .. } => Some(row),
            GadgetLabel::Column { .. } => None,
        }
    }
}

/// Builds the gadget for an `m × n` non-negative matrix with `k` copies per row.
pub fn bs_gadget(a: &Matrix, k: usize) -> Result<BipartiteGadget> {
    a.check_non_negative()?;
    let (m, n) = (a.rows(), a.cols());
    if k == 0 {
        return Err(Error::InvalidInput("k must be positive".into()));
    }
    if n > m * k {
        return Err(Error::Dimension(format!(
            "n = {n} columns exceed m·k = {} row copies",
            m * k
        )));
    }
    let mk = m * k;
    let total = 2 * n + 2 * mk;
    let r1 = |j: usize, t: usize| n + j * k + t;
    let r2 = |j: usize, t: usize| n + mk + j * k + t;
    let l2 = |i: usize| n + 2 * mk + i;

    let mut g = Graph::new(total);
    for i in 0..n {
        for j in 0..m {
            let w = a.get(j, i);
            if w != 0.0 {
                for t in 0..k {
                    g.add_edge(i, r1(j, t), w)?;
                }
            }
        }
    }
    let first_edges = g.edge_count();
    for i in 0..n {
        for j in 0..m {
            let w = a.get(j, i);
            if w != 0.0 {
                for t in 0..k {
                    g.add_edge(r2(j, t), l2(i), w)?;
                }
            }
        }
    }
    let second_edges = g.edge_count() - first_edges;
    for j in 0..m {
        for t in 0..k {
            g.add_edge(r2(j, t), r1(j, t), 1.0)?;
        }
    }
    let side = (0..total)
        .map(|v| {
            if v < n || (n + mk..n + 2 * mk).contains(&v) {
                Side::Left
            } else {
                Side::Right
            }
        })
        .collect();
    Ok(BipartiteGadget {
        bipartite: BipartiteGraph::from_sides(&g, side)?,
        matrix: a.clone(),
        k,
        first_edges,
        second_edges,
    })
}

/// Occupancy of a perfect matching: `z_j` counts the `R₁` vertices of row
/// group `j` matched into `L₁`.
pub fn extract_occupancy(gadget: &BipartiteGadget, pm: &Matching) -> Result<OccupancyVector> {
    pm.ensure_perfect(gadget.graph())?;
    Ok(occupancy_of_edges(gadget, pm.edges().iter().copied()))
}

pub(crate) fn occupancy_of_edges(
    gadget: &BipartiteGadget,
    edges: impl Iterator<Item = EdgeId>,
) -> OccupancyVector {
    let mut z = alloc::vec![0; gadget.rows()];
    for id in edges {
        if gadget.edge_class(id) == GadgetEdgeClass::First {
            let r = gadget.graph().edge(id).v;
            z[gadget.row_of(r).expect("E₁ edges end in R₁")] += 1;
        }
    }
    OccupancyVector(z)
}
