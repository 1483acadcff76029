//! Deterministic corpora: connected graphs up to isomorphism, a fixed matrix
//! grid, and small bipartite graphs for transition-matrix checks.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::bipartite::BipartiteGraph;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::matrix::Matrix;
use crate::oracle::exact_bs_distribution;

/// Largest vertex count [`connected_graphs`] accepts.
pub const CORPUS_MAX_N: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusGraph {
    pub id: String,
    pub graph: Graph,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusMatrix {
    pub id: String,
    pub matrix: Matrix,
}

fn pair_list(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect()
}

fn mask_connected(n: usize, pairs: &[(usize, usize)], mask: u32) -> bool {
    let mut adj = alloc::vec![0u32; n];
    for (i, &(u, v)) in pairs.iter().enumerate() {
        if mask >> i & 1 == 1 {
            adj[u] |= 1 << v;
            adj[v] |= 1 << u;
        }
    }
    let mut seen = 1u32;
    let mut frontier = 1u32;
    while frontier != 0 {
        let v = frontier.trailing_zeros() as usize;
        frontier &= frontier - 1;
        let new = adj[v] & !seen;
        seen |= new;
        frontier |= new;
    }
    seen.count_ones() as usize == n
}

/// Every vertex permutation of `0..n`, as images of each pair index.
fn pair_images(n: usize, pairs: &[(usize, usize)]) -> Vec<Vec<u8>> {
    let mut index = alloc::vec![alloc::vec![0u8; n]; n];
    for (i, &(u, v)) in pairs.iter().enumerate() {
        index[u][v] = i as u8;
        index[v][u] = i as u8;
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    loop {
        out.push(
            pairs
                .iter()
                .map(|&(u, v)| index[perm[u]][perm[v]])
                .collect(),
        );
        // Next permutation in lexicographic order.
        let Some(i) = (1..n).rev().find(|&i| perm[i - 1] < perm[i]) else {
            break;
        };
        let j = (i..n)
            .rev()
            .find(|&j| perm[j] > perm[i - 1])
            .expect("exists");
        perm.swap(i - 1, j);
        perm[i..].reverse();
    }
    out
}

/// All connected graphs on `1..=max_n` vertices up to isomorphism. Each class
/// is represented by its smallest edge bitmask (pairs `(u, v)`, `u < v`, in
/// lexicographic order), and identified as `n{n}-{mask}`.
pub fn connected_graphs(max_n: usize) -> Result<Vec<CorpusGraph>> {
    if max_n > CORPUS_MAX_N {
        return Err(Error::SizeLimit {
            what: "corpus vertex count",
            size: max_n,
            limit: CORPUS_MAX_N,
        });
    }
    let mut out = Vec::new();
    for n in 1..=max_n {
        let pairs = pair_list(n);
        let images = pair_images(n, &pairs);
        for mask in 0u32..(1 << pairs.len()) {
            if !mask_connected(n, &pairs, mask) {
                continue;
            }
            let canonical = images.iter().all(|img| {
                let mut mapped = 0u32;
                let mut rest = mask;
                while rest != 0 {
                    let i = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    mapped |= 1 << img[i];
                }
                mapped >= mask
            });
            if canonical {
                let edges = pairs
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &e)| e);
                out.push(CorpusGraph {
                    id: format!("n{n}-{mask}"),
                    graph: Graph::unweighted(n, edges)?,
                });
            }
        }
    }
    Ok(out)
}

pub(super) fn matrix_id(a: &Matrix) -> String {
    let digits: String = a
        .entries()
        .iter()
        .map(|&x| char::from(b'0' + x as u8))
        .collect();
    format!("m{}x{}-{}", a.rows(), a.cols(), digits)
}

/// Matrices with entries in `{0, 1, 2}`, at most 4 rows and 3 columns, whose
/// boson-sampling law is defined. Shapes with at most four entries are
/// enumerated completely; larger shapes use a fixed set of patterns.
pub fn matrix_corpus() -> Vec<CorpusMatrix> {
    type Pattern = fn(usize, usize) -> usize;
    let patterns: [Pattern; 7] = [
        |_, _| 1,
        |_, _| 2,
        |i, j| (i + j) % 3,
        |i, j| (2 * i + j) % 3,
        |i, j| (i + 2 * j + 1) % 3,
        |i, j| (i * j + 1) % 3,
        |i, j| if i % 3 == j { 2 } else { 1 },
    ];
    let mut out = Vec::new();
    for m in 1..=4 {
        for n in 1..=3 {
            let mut candidates = Vec::new();
            if m * n <= 4 {
                for code in 0..3usize.pow((m * n) as u32) {
                    let mut c = code;
                    candidates.push(Matrix::from_fn(m, n, |_, _| {
                        let d = c % 3;
                        c /= 3;
                        d as f64
                    }));
                }
            } else {
                for p in patterns {
                    let a = Matrix::from_fn(m, n, |i, j| p(i, j) as f64);
                    if !candidates.contains(&a) {
                        candidates.push(a);
                    }
                }
            }
            out.extend(
                candidates
                    .into_iter()
                    .filter(|a| exact_bs_distribution(a).is_ok())
                    .map(|matrix| CorpusMatrix {
                        id: matrix_id(&matrix),
                        matrix,
                    }),
            );
        }
    }
    out
}

/// Balanced bipartite graphs with a perfect matching and at most 8 vertices:
/// the qualifying members of the connected corpus up to 6 vertices, then
/// `K₄,₄`, `C₈`, the cube, the 2×4 ladder and a weighted `K₄,₄`.
pub fn pm_chain_corpus() -> Result<Vec<(String, BipartiteGraph)>> {
    let mut out = Vec::new();
    for item in connected_graphs(6)? {
        let Ok(bg) = BipartiteGraph::from_graph(&item.graph) else {
            continue;
        };
        if bg.is_balanced() && bg.find_perfect_matching().is_some() {
            out.push((item.id, bg));
        }
    }
    let k44 = Matrix::from_fn(4, 4, |_, _| 1.0);
    out.push(("k4,4".into(), BipartiteGraph::from_biadjacency(&k44)?));
    let c8 = Graph::cycle(8);
    out.push(("c8".into(), BipartiteGraph::from_graph(&c8)?));
    let cube = Graph::unweighted(
        8,
        (0..8usize)
            .flat_map(|v| (0..3).map(move |b| (v, v ^ (1 << b))))
            .filter(|&(u, v)| u < v),
    )?;
    out.push(("cube".into(), BipartiteGraph::from_graph(&cube)?));
    let ladder = Graph::unweighted(
        8,
        (0..3)
            .flat_map(|i| [(i, i + 1), (i + 4, i + 5)])
            .chain((0..4).map(|i| (i, i + 4))),
    )?;
    out.push(("ladder".into(), BipartiteGraph::from_graph(&ladder)?));
    let weighted = Matrix::from_fn(4, 4, |i, j| [0.5, 1.0, 2.0, 3.0][(i + 2 * j) % 4]);
    out.push((
        "k4,4-weighted".into(),
        BipartiteGraph::from_biadjacency(&weighted)?,
    ));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn connected_graph_counts() {
        let all = connected_graphs(6).unwrap();
        let mut counts = [0usize; 7];
        for g in &all {
            counts[g.graph.vertex_count()] += 1;
            assert!(g.graph.is_connected());
        }
        assert_eq!(counts[1..], [1, 1, 2, 6, 21, 112]);
        assert!(connected_graphs(7).is_err());
    }

    #[test]
    fn matrix_corpus_shape() {
        let all = matrix_corpus();
        assert!(all
            .iter()
            .all(|c| c.matrix.rows() <= 4 && c.matrix.cols() <= 3));
        assert!(all.iter().any(|c| c.id == "m1x1-1"));
        assert!(!all.iter().any(|c| c.id == "m2x2-0000"));
        let mut ids: Vec<&str> = all.iter().map(|c| c.id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), all.len());
    }

    #[test]
    fn pm_corpus_is_small_and_balanced() {
        for (_, bg) in pm_chain_corpus().unwrap() {
            assert!(bg.graph().vertex_count() <= 8);
            assert!(bg.is_balanced());
        }
    }
}
