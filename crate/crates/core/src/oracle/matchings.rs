//! Exhaustive matching enumeration and matching partition functions.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::exact::ScaledIntegers;
use super::Scalar;
use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, Matching};

pub const ENUMERATION_MAX_VERTICES: usize = 16;

fn check_enumerable(g: &Graph, limit: usize) -> Result<()> {
    if g.vertex_count() > limit {
        return Err(Error::SizeLimit {
            what: "vertex count for enumeration",
            size: g.vertex_count(),
            limit,
        });
    }
    Ok(())
}

/// Calls `visit` once per matching of `g` (as a slice of edge ids, ascending by
/// lowest endpoint). Vertices are processed in index order: each is either
/// left uncovered or matched to a higher free neighbour.
pub fn for_each_matching(g: &Graph, mut visit: impl FnMut(&[EdgeId])) {
    fn rec(
        g: &Graph,
        v: usize,
        used: &mut [bool],
        chosen: &mut Vec<EdgeId>,
        visit: &mut dyn FnMut(&[EdgeId]),
    ) {
        let n = g.vertex_count();
        let mut v = v;
        while v < n && used[v] {
            v += 1;
        }
        if v >= n {
            visit(chosen);
            return;
        }
        used[v] = true;
        rec(g, v + 1, used, chosen, visit);
        for &(u, id) in g.neighbors(v) {
            if !used[u] {
                used[u] = true;
                chosen.push(id);
                rec(g, v + 1, used, chosen, visit);
                chosen.pop();
                used[u] = false;
            }
        }
        used[v] = false;
    }
    let mut used = alloc::vec![false; g.vertex_count()];
    rec(g, 0, &mut used, &mut Vec::new(), &mut visit);
}

/// Calls `visit` once per perfect matching of `g`.
pub fn for_each_perfect_matching(g: &Graph, mut visit: impl FnMut(&[EdgeId])) {
    fn rec(
        g: &Graph,
        v: usize,
        used: &mut [bool],
        chosen: &mut Vec<EdgeId>,
        visit: &mut dyn FnMut(&[EdgeId]),
    ) {
        let n = g.vertex_count();
        let mut v = v;
        while v < n && used[v] {
            v += 1;
        }
        if v >= n {
            visit(chosen);
            return;
        }
        used[v] = true;
        for &(u, id) in g.neighbors(v) {
            if !used[u] {
                used[u] = true;
                chosen.push(id);
                rec(g, v + 1, used, chosen, visit);
                chosen.pop();
                used[u] = false;
            }
        }
        used[v] = false;
    }
    if g.vertex_count() % 2 == 1 {
        return;
    }
    let mut used = alloc::vec![false; g.vertex_count()];
    rec(g, 0, &mut used, &mut Vec::new(), &mut visit);
}

fn to_matching(ids: &[EdgeId]) -> Matching {
    let mut v = ids.to_vec();
    v.sort_unstable();
    Matching::from_sorted_unchecked(v)
}

/// All matchings of `g`, grouped by size (`result[k]` holds the `k`-edge matchings).
pub fn enumerate_matchings(g: &Graph) -> Result<Vec<Vec<Matching>>> {
    enumerate_matchings_with_limit(g, ENUMERATION_MAX_VERTICES)
}

pub fn enumerate_matchings_with_limit(g: &Graph, limit: usize) -> Result<Vec<Vec<Matching>>> {
    check_enumerable(g, limit)?;
    let mut groups: Vec<Vec<Matching>> = alloc::vec![Vec::new(); g.vertex_count() / 2 + 1];
    for_each_matching(g, |ids| groups[ids.len()].push(to_matching(ids)));
    while groups.len() > 1 && groups.last().is_some_and(Vec::is_empty) {
        groups.pop();
    }
    Ok(groups)
}

pub fn enumerate_perfect_matchings(g: &Graph) -> Result<Vec<Matching>> {
    check_enumerable(g, ENUMERATION_MAX_VERTICES)?;
    let mut out = Vec::new();
    for_each_perfect_matching(g, |ids| out.push(to_matching(ids)));
    Ok(out)
}

/// `Z_k`, the total weight of `k`-edge matchings, for `k = 0..=⌊n/2⌋`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionProfile {
    pub z_by_size: Vec<f64>,
    pub total: f64,
}

impl PartitionProfile {
    pub fn z(&self, k: usize) -> f64 {
        self.z_by_size.get(k).copied().unwrap_or(0.0)
    }
}

/// Generating polynomial of matchings by size, over the vertex-subset lattice:
/// `Z(S) = Z(S − v) + Σ_{u ∈ N(v) ∩ S} λ_vu · t · Z(S − v − u)` with `v = min S`.
fn matching_polynomial<T: Scalar>(g: &Graph, weights: &[T]) -> Vec<T> {
    let n = g.vertex_count();
    let top = n / 2;
    let mut nbr_masks: Vec<Vec<(u32, usize)>> = alloc::vec![Vec::new(); n];
    for (id, e) in g.edges().iter().enumerate() {
        nbr_masks[e.u].push((1 << e.v, id));
        nbr_masks[e.v].push((1 << e.u, id));
    }
    let full = ((1u64 << n) - 1) as u32;
    let mut table: Vec<Vec<T>> = Vec::with_capacity(1 << n);
    table.push(alloc::vec![T::one()]);
    for mask in 1..=full {
        let v = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << v);
        let mut poly = table[rest as usize].clone();
        for &(bit, id) in &nbr_masks[v] {
            if rest & bit != 0 {
                let sub = &table[(rest & !bit) as usize];
                if poly.len() < sub.len() + 1 {
                    poly.resize(sub.len() + 1, T::zero());
                }
                for (k, c) in sub.iter().enumerate() {
                    poly[k + 1] = poly[k + 1].clone() + weights[id].clone() * c.clone();
                }
            }
        }
        table.push(poly);
    }
    let mut out = table.pop().unwrap_or_else(|| alloc::vec![T::one()]);
    out.resize(top + 1, T::zero());
    out
}

/// `Z_k` for every `k` by dynamic programming over vertex subsets.
pub fn partition_profile(g: &Graph) -> Result<PartitionProfile> {
    check_enumerable(g, ENUMERATION_MAX_VERTICES)?;
    let weights: Vec<f64> = g.edges().iter().map(|e| e.weight).collect();
    let z_by_size = matching_polynomial(g, &weights);
    let total = z_by_size.iter().sum();
    Ok(PartitionProfile { z_by_size, total })
}

/// `Z_k` by explicit enumeration of every matching (independent of the subset recursion).
pub fn partition_profile_by_enumeration(g: &Graph) -> Result<PartitionProfile> {
    check_enumerable(g, ENUMERATION_MAX_VERTICES)?;
    let mut z_by_size = alloc::vec![0.0; g.vertex_count() / 2 + 1];
    for_each_matching(g, |ids| {
        z_by_size[ids.len()] += ids.iter().map(|&id| g.edge(id).weight).product::<f64>();
    });
    let total = z_by_size.iter().sum();
    Ok(PartitionProfile { z_by_size, total })
}

/// Exact `Z_k`: the stored integers are `Z_k · 2^(shift·k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactProfile {
    pub scaled: Vec<BigInt>,
    pub shift: u32,
}

impl ExactProfile {
    pub fn len(&self) -> usize {
        self.scaled.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scaled.is_empty()
    }

    pub fn z(&self, k: usize) -> BigRational {
        BigRational::new(
            self.scaled[k].clone(),
            BigInt::from(1u8) << (self.shift as usize * k),
        )
    }

    pub fn total(&self) -> BigRational {
        (0..self.scaled.len()).map(|k| self.z(k)).sum()
    }
}

pub fn partition_profile_exact(g: &Graph) -> Result<ExactProfile> {
    check_enumerable(g, ENUMERATION_MAX_VERTICES)?;
    let weights: Vec<f64> = g.edges().iter().map(|e| e.weight).collect();
    let scaled = ScaledIntegers::from_f64(&weights);
    Ok(ExactProfile {
        scaled: matching_polynomial(g, &scaled.numerators),
        shift: scaled.shift,
    })
}

/// `m_k`, the number of `k`-edge matchings.
pub fn matching_counts(g: &Graph) -> Result<Vec<u128>> {
    check_enumerable(g, ENUMERATION_MAX_VERTICES)?;
    let ones = alloc::vec![1u128; g.edge_count()];
    Ok(matching_polynomial(g, &ones))
}
