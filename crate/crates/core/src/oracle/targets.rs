//! Exact target distributions by brute force.

use alloc::format;
use alloc::vec::Vec;

use super::distribution::DistributionTable;
use super::hafnian::pairing_sum;
use super::matchings::{for_each_matching, for_each_perfect_matching};
use super::permanent::{permanent, RYSER_MAX};
use crate::error::{Error, Result};
use crate::gadget::{occupancy_count, occupancy_of_edges, occupancy_vectors, BipartiteGadget};
use crate::graph::Graph;
use crate::matrix::Matrix;

pub const GBS_MAX_VERTICES: usize = 12;
pub const OCCUPANCY_MAX: usize = 100_000;
pub const GADGET_ENUMERATION_MAX_VERTICES: usize = 16;
pub const MATCHING_TABLE_MAX_VERTICES: usize = 16;

/// Perfect-matching count of the subgraph induced by the vertices in `mask`.
fn induced_pm_count(g: &Graph, mask: u32) -> i128 {
    let members: Vec<usize> = (0..g.vertex_count())
        .filter(|&v| mask >> v & 1 == 1)
        .collect();
    let s = members.len();
    let mut adj = alloc::vec![0i128; s * s];
    for (a, &u) in members.iter().enumerate() {
        for (b, &v) in members.iter().enumerate() {
            if g.edge_between(u, v).is_some() {
                adj[a * s + b] = 1;
            }
        }
    }
    pairing_sum(s, &adj)
}

/// `μ_GBS(S) ∝ c^{2|S|}·Haf(A_S)²` over vertex subsets of `g`; edge weights of `g`
/// are ignored.
pub fn exact_gbs_distribution(g: &Graph, c: f64) -> Result<DistributionTable> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidInput(format!("c must be positive, got {c}")));
    }
    let n = g.vertex_count();
    if n > GBS_MAX_VERTICES {
        return Err(Error::SizeLimit {
            what: "vertex count for the exact GBS table",
            size: n,
            limit: GBS_MAX_VERTICES,
        });
    }
    let c2 = c * c;
    let mut weights = Vec::new();
    for mask in 0u32..(1 << n) {
        let size = mask.count_ones() as usize;
        if size % 2 == 1 {
            continue;
        }
        let pm = induced_pm_count(g, mask);
        if pm == 0 {
            continue;
        }
        let key = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
        let pm = pm as f64;
        weights.push((key, libm::pow(c2, size as f64) * pm * pm));
    }
    DistributionTable::from_weights(weights)
}

/// `μ_matching(M) ∝ Π λ_e`, keyed by sorted edge ids.
pub fn exact_matching_distribution(g: &Graph) -> Result<DistributionTable> {
    check_vertices(g)?;
    let mut weights = Vec::new();
    for_each_matching(g, |ids| weights.push(keyed(g, ids)));
    DistributionTable::from_weights(weights)
}

/// `μ_PM(M) ∝ Π λ_e` over perfect matchings, keyed by sorted edge ids.
pub fn exact_pm_distribution(g: &Graph) -> Result<DistributionTable> {
    check_vertices(g)?;
    let mut weights = Vec::new();
    for_each_perfect_matching(g, |ids| weights.push(keyed(g, ids)));
    DistributionTable::from_weights(weights).map_err(|e| match e {
        Error::ZeroNormalizer => Error::NoPerfectMatching,
        other => other,
    })
}

fn check_vertices(g: &Graph) -> Result<()> {
    if g.vertex_count() > MATCHING_TABLE_MAX_VERTICES {
        return Err(Error::SizeLimit {
            what: "vertex count for the exact matching table",
            size: g.vertex_count(),
            limit: MATCHING_TABLE_MAX_VERTICES,
        });
    }
    Ok(())
}

fn keyed(g: &Graph, ids: &[usize]) -> (Vec<usize>, f64) {
    let mut key = ids.to_vec();
    key.sort_unstable();
    let w = ids.iter().map(|&id| g.edge(id).weight).product();
    (key, w)
}

fn check_occupancy(a: &Matrix) -> Result<()> {
    let count = occupancy_count(a.rows(), a.cols());
    if count > OCCUPANCY_MAX {
        return Err(Error::SizeLimit {
            what: "number of occupancy vectors",
            size: count,
            limit: OCCUPANCY_MAX,
        });
    }
    if a.cols() > RYSER_MAX {
        return Err(Error::SizeLimit {
            what: "matrix columns",
            size: a.cols(),
            limit: RYSER_MAX,
        });
    }
    a.check_non_negative()
}

fn factorial(z: usize) -> f64 {
    (1..=z).map(|i| i as f64).product()
}

/// `Π_i C(k, z_i)` in floating point.
pub fn binomial_product(z: &[usize], k: usize) -> f64 {
    z.iter()
        .map(|&zi| {
            (0..zi)
                .map(|j| (k - j) as f64 / (j + 1) as f64)
                .product::<f64>()
        })
        .product()
}

/// `Π_i Π_{j<z_i} (1 − j/k)`: the ratio between gadget and boson-sampling weights.
pub fn bias_factor(z: &[usize], k: usize) -> f64 {
    z.iter()
        .map(|&zi| (0..zi).map(|j| 1.0 - j as f64 / k as f64).product::<f64>())
        .product()
}

/// `Perm(A_z)²` for every `z ∈ Φ_{m,n}`.
fn squared_permanents(a: &Matrix) -> Result<Vec<(Vec<usize>, f64)>> {
    occupancy_vectors(a.rows(), a.cols())
        .into_iter()
        .map(|z| {
            let p = permanent(&a.repeat_rows(&z))?;
            Ok((z, p * p))
        })
        .collect()
}

/// `μ_BS(z) ∝ Perm(A_z)² / Π z_i!` over `Φ_{m,n}`.
pub fn exact_bs_distribution(a: &Matrix) -> Result<DistributionTable> {
    check_occupancy(a)?;
    let weights = squared_permanents(a)?.into_iter().map(|(z, p2)| {
        let denom: f64 = z.iter().map(|&zi| factorial(zi)).product();
        (z, p2 / denom)
    });
    DistributionTable::from_weights(weights)
}

/// The occupancy law `ν` induced by the gadget's perfect-matching distribution.
///
/// The closed form `ν(z) ∝ Π C(k, z_i)·Perm(A_z)²` is checked against a second
/// route: exhaustive perfect-matching enumeration when the gadget has at most
/// [`GADGET_ENUMERATION_MAX_VERTICES`] vertices, and the boson-sampling weights
/// times [`bias_factor`] otherwise. Disagreement beyond `1e-10` is an error.
pub fn exact_gadget_distribution(gadget: &BipartiteGadget) -> Result<DistributionTable> {
    let a = gadget.matrix();
    let k = gadget.k();
    check_occupancy(a)?;
    let perms = squared_permanents(a)?;
    let closed = DistributionTable::from_weights(
        perms
            .iter()
            .map(|(z, p2)| (z.clone(), binomial_product(z, k) * p2)),
    )?;
    let other = if gadget.graph().vertex_count() <= GADGET_ENUMERATION_MAX_VERTICES {
        let g = gadget.graph();
        let mut weights = Vec::new();
        for_each_perfect_matching(g, |ids| {
            let w: f64 = ids.iter().map(|&id| g.edge(id).weight).product();
            weights.push((occupancy_of_edges(gadget, ids.iter().copied()).0, w));
        });
        DistributionTable::from_weights(weights)?
    } else {
        DistributionTable::from_weights(perms.iter().map(|(z, p2)| {
            let denom: f64 = z.iter().map(|&zi| factorial(zi)).product();
            (z.clone(), p2 / denom * bias_factor(z, k))
        }))?
    };
    for (key, p) in closed.iter() {
        let q = other.probability(key);
        if (p - q).abs() > 1e-10 * p.max(q) {
            return Err(Error::OracleMismatch(format!(
                "gadget outcome {key:?}: closed form {p:e}, second route {q:e}"
            )));
        }
    }
    if other.len() != closed.len() {
        return Err(Error::OracleMismatch(format!(
            "gadget support sizes differ: {} vs {}",
            closed.len(),
            other.len()
        )));
    }
    Ok(closed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadget::bs_gadget;
    use alloc::vec;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn gbs_tables() {
        let k2 = Graph::complete(2);
        let t = exact_gbs_distribution(&k2, 1.0).unwrap();
        assert!(close(t.probability(&[]), 0.5));
        assert!(close(t.probability(&[0, 1]), 0.5));
        let c: f64 = 0.7;
        let t = exact_gbs_distribution(&k2, c).unwrap();
        let c4 = c.powi(4);
        assert!(close(t.probability(&[0, 1]), c4 / (1.0 + c4)));

        let k3 = exact_gbs_distribution(&Graph::complete(3), 1.0).unwrap();
        assert_eq!(k3.len(), 4);
        for key in [vec![], vec![0, 1], vec![0, 2], vec![1, 2]] {
            assert!(close(k3.probability(&key), 0.25));
        }
        // K₄ at c = 1: ∅ → 1, six pairs → 1 each, V → 3² = 9.
        let k4 = exact_gbs_distribution(&Graph::complete(4), 1.0).unwrap();
        assert!(close(k4.probability(&[0, 1, 2, 3]), 9.0 / 16.0));
    }

    #[test]
    fn bs_tables() {
        let single = exact_bs_distribution(&Matrix::from_rows(&[vec![1.0]]).unwrap()).unwrap();
        assert_eq!(single.probability(&[1]), 1.0);

        let ones = exact_bs_distribution(&Matrix::from_fn(3, 2, |_, _| 1.0)).unwrap();
        for z in occupancy_vectors(3, 2) {
            let expect = if z.contains(&2) { 1.0 / 9.0 } else { 2.0 / 9.0 };
            assert!(close(ones.probability(&z), expect));
        }

        let id = exact_bs_distribution(&Matrix::identity(2)).unwrap();
        assert_eq!(id.len(), 1);
        assert_eq!(id.probability(&[1, 1]), 1.0);

        let zero_col = Matrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(exact_bs_distribution(&zero_col), Err(Error::ZeroNormalizer));
    }

    #[test]
    fn gadget_tables() {
        let g = bs_gadget(&Matrix::from_rows(&[vec![1.0]]).unwrap(), 1).unwrap();
        assert_eq!(
            exact_gadget_distribution(&g).unwrap().probability(&[1]),
            1.0
        );

        for k in 1..=3 {
            let g = bs_gadget(&Matrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap(), k).unwrap();
            let t = exact_gadget_distribution(&g).unwrap();
            assert!(close(t.probability(&[1, 0]), 0.5));
        }

        let g = bs_gadget(&Matrix::from_rows(&[vec![1.0], vec![2.0]]).unwrap(), 1).unwrap();
        let t = exact_gadget_distribution(&g).unwrap();
        assert!(close(t.probability(&[1, 0]), 0.2));
        assert!(close(t.probability(&[0, 1]), 0.8));

        // Fig. 1 gadget: both routes (enumeration and closed form) run.
        let fig1 = bs_gadget(&Matrix::from_fn(3, 2, |_, _| 1.0), 2).unwrap();
        let t = exact_gadget_distribution(&fig1).unwrap();
        // weights C(2,1)²·2² = 16 for (1,1,0)-type and C(2,2)·2² = 4 for (2,0,0)-type
        assert!(close(t.probability(&[1, 1, 0]), 16.0 / 60.0));
        assert!(close(t.probability(&[2, 0, 0]), 4.0 / 60.0));

        let big = bs_gadget(&Matrix::from_fn(3, 2, |i, j| (i + j) as f64), 40).unwrap();
        assert!(exact_gadget_distribution(&big).is_ok());
    }

    #[test]
    fn bias_factors() {
        assert_eq!(bias_factor(&[1, 1, 0], 5), 1.0);
        assert_eq!(bias_factor(&[2, 0], 32), 31.0 / 32.0);
        assert_eq!(binomial_product(&[2, 1], 4), 6.0 * 4.0);
    }

    #[test]
    fn matching_tables() {
        let t = exact_matching_distribution(&Graph::cycle(4)).unwrap();
        assert_eq!(t.len(), 7);
        let star = Graph::unweighted(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let t = exact_matching_distribution(&star).unwrap();
        assert!(t.iter().all(|(_, p)| close(p, 0.25)));
        assert_eq!(
            exact_pm_distribution(&Graph::complete(3)),
            Err(Error::NoPerfectMatching)
        );
    }
}
