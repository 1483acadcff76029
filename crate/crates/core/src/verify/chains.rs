//! Explicit transition matrices: detailed balance and stationary vectors.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::VerificationReport;
use crate::bipartite::BipartiteGraph;
use crate::error::{Error, Result};
use crate::graph::{Graph, Matching};
use crate::matching_chain::transition_row;
use crate::oracle::matchings::{enumerate_matchings_with_limit, ENUMERATION_MAX_VERTICES};
use crate::pm_chain::{pm_state_weight, pm_transition_row, HoleWeights};

const TOLERANCE: f64 = 1e-10;

/// The stationary row vector of a stochastic matrix, by Gaussian elimination
/// on `π(P − I) = 0`, `Σπ = 1`. Fails if the chain is reducible.
pub fn stationary_vector(p: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = p.len();
    // Row i of the system is column i of (P − I); the last row is replaced by Σπ = 1.
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n).map(|j| p[j][i]).collect();
            row[i] -= 1.0;
            row.push(0.0);
            row
        })
        .collect();
    if let Some(last) = a.last_mut() {
        last.iter_mut().for_each(|x| *x = 1.0);
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .expect("non-empty range");
        if a[pivot][col].abs() < 1e-300 {
            return Err(Error::InvalidInput("transition matrix is reducible".into()));
        }
        a.swap(col, pivot);
        let pivot_row = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != col && row[col] != 0.0 {
                let f = row[col] / pivot_row[col];
                for (x, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                    *x -= f * p;
                }
            }
        }
    }
    Ok((0..n).map(|i| a[i][n] / a[i][i]).collect())
}

struct Chain {
    p: Vec<Vec<f64>>,
    target: Vec<f64>,
}

fn build(
    states: Vec<Matching>,
    weight: impl Fn(&Matching) -> Result<f64>,
    row: impl Fn(&Matching) -> Result<Vec<(Matching, f64)>>,
) -> Result<Chain> {
    let index: BTreeMap<&Matching, usize> =
        states.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let n = states.len();
    let mut p = alloc::vec![alloc::vec![0.0; n]; n];
    for (i, m) in states.iter().enumerate() {
        for (next, prob) in row(m)? {
            let j = *index.get(&next).ok_or_else(|| {
                Error::InvalidInput(alloc::format!(
                    "transition leaves the state space: {next:?}"
                ))
            })?;
            p[i][j] += prob;
        }
    }
    let raw: Vec<f64> = states.iter().map(&weight).collect::<Result<_>>()?;
    let total: f64 = raw.iter().sum();
    Ok(Chain {
        p,
        target: raw.iter().map(|w| w / total).collect(),
    })
}

fn reports(prefix: &str, item: &str, chain: &Chain) -> Result<Vec<VerificationReport>> {
    let n = chain.target.len();
    let (p, pi) = (&chain.p, &chain.target);
    let mut balance = 0.0f64;
    let mut row_sum = 0.0f64;
    for i in 0..n {
        row_sum = row_sum.max((p[i].iter().sum::<f64>() - 1.0).abs());
        for j in 0..n {
            balance = balance.max((pi[i] * p[i][j] - pi[j] * p[j][i]).abs());
        }
    }
    let stationary = stationary_vector(p)?;
    let gap = stationary
        .iter()
        .zip(pi)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let mut name = String::from(prefix);
    name.push_str("-balance");
    let mut out = alloc::vec![VerificationReport::at_most(
        name,
        item,
        TOLERANCE,
        balance.max(row_sum)
    )];
    let mut name = String::from(prefix);
    name.push_str("-stationary");
    out.push(VerificationReport::at_most(name, item, TOLERANCE, gap));
    Ok(out)
}

/// Detailed balance and stationarity of the matching chain on `g` against
/// `π(M) ∝ Π λ_e`.
pub fn check_matching_chain(item: &str, g: &Graph) -> Result<Vec<VerificationReport>> {
    let states: Vec<Matching> = enumerate_matchings_with_limit(g, ENUMERATION_MAX_VERTICES)?
        .into_iter()
        .flatten()
        .collect();
    let chain = build(states, |m| Ok(m.weight(g)), |m| Ok(transition_row(g, m)))?;
    reports("matching-chain", item, &chain)
}

/// Detailed balance and stationarity of the perfect-matching chain on `bg`
/// with hole weights `hw` against `Λ`.
pub fn check_pm_chain(
    item: &str,
    bg: &BipartiteGraph,
    hw: &HoleWeights,
) -> Result<Vec<VerificationReport>> {
    let part = bg.part_size()?;
    let states: Vec<Matching> =
        enumerate_matchings_with_limit(bg.graph(), ENUMERATION_MAX_VERTICES)?
            .into_iter()
            .skip(part.saturating_sub(1))
            .flatten()
            .collect();
    let chain = build(
        states,
        |m| pm_state_weight(bg, hw, m),
        |m| pm_transition_row(bg, hw, m),
    )?;
    reports("pm-chain", item, &chain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pm_chain::compute_hole_weights_exact;
    use alloc::vec;

    #[test]
    fn two_state_stationary() {
        let p = vec![vec![0.9, 0.1], vec![0.3, 0.7]];
        let pi = stationary_vector(&p).unwrap();
        assert!((pi[0] - 0.75).abs() < 1e-15 && (pi[1] - 0.25).abs() < 1e-15);
        let reducible = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!(stationary_vector(&reducible).is_err());
    }

    #[test]
    fn small_chains_balance() {
        let g = Graph::from_edges(4, [(0, 1, 2.0), (1, 2, 0.5), (2, 3, 1.0), (3, 0, 3.0)]).unwrap();
        assert!(check_matching_chain("c4", &g)
            .unwrap()
            .iter()
            .all(|r| r.passed));
        let bg = BipartiteGraph::from_graph(&g).unwrap();
        let hw = compute_hole_weights_exact(&bg).unwrap();
        assert!(check_pm_chain("c4", &bg, &hw)
            .unwrap()
            .iter()
            .all(|r| r.passed));
    }

    #[test]
    fn balance_holds_for_any_hole_weights() {
        let g = Graph::cycle(4);
        let bg = BipartiteGraph::from_graph(&g).unwrap();
        let mut hw = compute_hole_weights_exact(&bg).unwrap();
        let (u, v, w) = hw.iter_positions().next().unwrap();
        hw.set(bg.left()[u], bg.right()[v], w * 3.0);
        let r = check_pm_chain("c4", &bg, &hw).unwrap();
        assert!(r.iter().all(|r| r.passed));
    }
}
