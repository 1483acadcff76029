//! Exact inequality and oracle checks on single corpus items.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;

use super::VerificationReport;
use crate::bs::{choose_k, gadget_bias_report};
use crate::error::Result;
use crate::gadget::bs_gadget;
use crate::gbs::boost_weights;
use crate::graph::Graph;
use crate::matrix::Matrix;
use crate::oracle::exact::rational_to_f64;
use crate::oracle::matchings::for_each_perfect_matching;
use crate::oracle::permanent::{naive, ryser};
use crate::oracle::{
    exact_bs_distribution, exact_gadget_distribution, exact_gbs_distribution,
    exact_pm_distribution, hafnian_exact, matching_counts, partition_profile_exact, tv_distance,
};
use crate::product::{cartesian_product_k2, subset_from_original_edges};

fn ratio(num: &BigRational, den: &BigRational) -> f64 {
    if den.is_zero() {
        f64::INFINITY
    } else {
        rational_to_f64(&(num / den))
    }
}

/// The perfect-matching law on `G □ K₂`, pushed through the projection to
/// vertex subsets, against the GBS table.
pub fn check_lemma1(item: &str, g: &Graph, c: f64) -> Result<VerificationReport> {
    let pg = cartesian_product_k2(g, c)?;
    let pm = exact_pm_distribution(pg.graph())?;
    let mut projected: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for (key, p) in pm.iter() {
        *projected
            .entry(subset_from_original_edges(&pg, key.iter().copied()))
            .or_insert(0.0) += p;
    }
    let gbs = exact_gbs_distribution(g, c)?;
    let mut dev = 0.0f64;
    for (key, &p) in &projected {
        dev = dev.max((p - gbs.probability(key)).abs());
    }
    for (key, q) in gbs.iter() {
        dev = dev.max((projected.get(key).copied().unwrap_or(0.0) - q).abs());
    }
    Ok(VerificationReport::at_most(
        format!("lemma1-c{c}"),
        item,
        1e-10,
        dev,
    ))
}

/// `Z_{n−1} < 2n²·Z_n` on `G □ K₂`, exactly; `observed` is `Z_{n−1}/Z_n`.
pub fn check_lemma2(item: &str, g: &Graph, c: f64) -> Result<VerificationReport> {
    let pg = cartesian_product_k2(g, c)?;
    let z = partition_profile_exact(pg.graph())?;
    let n = g.vertex_count();
    let bound = BigRational::from_integer(BigInt::from(2 * n * n));
    let (below, top) = if n == 0 {
        (BigRational::zero(), z.z(0))
    } else {
        (z.z(n - 1), z.z(n))
    };
    let passed = below < bound * &top;
    Ok(VerificationReport::new(
        format!("lemma2-c{c}"),
        item,
        (2 * n * n) as f64,
        ratio(&below, &top),
        passed,
    ))
}

/// `x_{k−1}·x_{k+1} ≤ x_k²` for all interior `k`; returns whether it holds and
/// the largest ratio `x_{k−1}x_{k+1}/x_k²`.
fn log_concave(xs: &[BigInt]) -> (bool, f64) {
    let mut ok = true;
    let mut worst = 0.0f64;
    for k in 1..xs.len().saturating_sub(1) {
        let lhs = &xs[k - 1] * &xs[k + 1];
        let rhs = &xs[k] * &xs[k];
        ok &= lhs <= rhs;
        if !rhs.is_zero() {
            let r = BigRational::new(lhs, rhs);
            worst = worst.max(r.to_f64().unwrap_or(f64::INFINITY));
        } else if !lhs.is_zero() {
            worst = f64::INFINITY;
        }
    }
    (ok, worst)
}

/// Log-concavity of matching counts `m_k` and of matching weights `Z_k`,
/// both exactly.
pub fn check_log_concavity(item: &str, g: &Graph) -> Result<VerificationReport> {
    let counts: Vec<BigInt> = matching_counts(g)?.into_iter().map(BigInt::from).collect();
    // Z_k·2^{sk}: the common scaling cancels in the inequality.
    let weighted = partition_profile_exact(g)?.scaled;
    let (ok_m, worst_m) = log_concave(&counts);
    let (ok_z, worst_z) = log_concave(&weighted);
    Ok(VerificationReport::new(
        "log-concavity",
        item,
        1.0,
        worst_m.max(worst_z),
        ok_m && ok_z,
    ))
}

/// `Z′ < 2·Z′_n` on the boosted product graph, exactly; `observed` is the
/// perfect fraction `Z′_n / Z′`, which must exceed `1/2`.
pub fn check_boosted_acceptance(item: &str, g: &Graph, c: f64) -> Result<VerificationReport> {
    let pg = boost_weights(&cartesian_product_k2(g, c)?)?;
    let z = partition_profile_exact(pg.graph())?;
    let n = g.vertex_count();
    let total = z.total();
    let perfect = z.z(n);
    let passed = total < perfect.clone() * BigRational::from_integer(BigInt::from(2));
    Ok(VerificationReport::new(
        format!("boosted-acceptance-c{c}"),
        item,
        0.5,
        ratio(&perfect, &total),
        passed,
    ))
}

/// Exact `tv(ν, μ_BS) ≤ ε/2` for the gadget with `k = ⌈4n²/ε⌉`, and every
/// bias factor in `[e^{−ε/2}, 1]`.
pub fn check_gadget_closeness(
    item: &str,
    a: &Matrix,
    epsilon: f64,
) -> Result<Vec<VerificationReport>> {
    let k = choose_k(a.cols(), epsilon)?;
    let nu = exact_gadget_distribution(&bs_gadget(a, k)?)?;
    let mu = exact_bs_distribution(a)?;
    let tv = tv_distance(&nu, &mu);
    let bias = gadget_bias_report(a, k)?;
    let floor = libm::exp(-epsilon / 2.0);
    Ok(alloc::vec![
        VerificationReport::at_most(format!("gadget-tv-eps{epsilon}"), item, epsilon / 2.0, tv),
        VerificationReport::new(
            format!("gadget-bias-eps{epsilon}"),
            item,
            floor,
            bias.min_factor,
            bias.within(epsilon),
        ),
    ])
}

/// Ryser against naive expansion on `count` random integer matrices with
/// entries in `0..=9` and sizes `1..=max_n`; `observed` counts mismatches.
pub fn check_permanent_oracles<R: Rng + ?Sized>(
    count: usize,
    max_n: usize,
    rng: &mut R,
) -> VerificationReport {
    let mut mismatches = 0u64;
    for _ in 0..count {
        let n = rng.random_range(1..=max_n.max(1));
        let entries: Vec<BigInt> = (0..n * n)
            .map(|_| BigInt::from(rng.random_range(0..=9u8)))
            .collect();
        if ryser(n, &entries) != naive(n, &entries) {
            mismatches += 1;
        }
    }
    VerificationReport::at_most("permanent-oracles", "random", 0.0, mismatches as f64)
        .with_samples(count as u64)
}

/// The exact hafnian of the weight matrix against the weighted perfect-matching
/// sum by enumeration; `observed` is the absolute difference.
pub fn check_hafnian_oracle(item: &str, g: &Graph) -> Result<VerificationReport> {
    let haf = hafnian_exact(&g.weight_matrix())?;
    let mut by_enumeration = BigRational::zero();
    for_each_perfect_matching(g, |ids| {
        by_enumeration += ids
            .iter()
            .map(|&id| crate::oracle::exact::rational_from_f64(g.edge(id).weight))
            .product::<BigRational>();
    });
    let diff = haf - by_enumeration;
    Ok(VerificationReport::new(
        "hafnian-oracle",
        item,
        0.0,
        rational_to_f64(&diff).abs(),
        diff.is_zero(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;
    use alloc::vec;

    #[test]
    fn lemma2_examples() {
        let r = check_lemma2("k2", &Graph::complete(2), 1.0).unwrap();
        assert!(r.passed);
        assert_eq!((r.observed, r.claimed_bound), (2.0, 8.0));
        assert!(check_lemma2("k3", &Graph::complete(3), 1.0).unwrap().passed);
        let r = check_lemma2("empty2", &Graph::new(2), 1.0).unwrap();
        assert!(r.passed && r.observed == 2.0);
    }

    #[test]
    fn log_concavity_examples() {
        assert!(check_log_concavity("c4", &Graph::cycle(4)).unwrap().passed);
        let r = check_log_concavity("k4", &Graph::complete(4)).unwrap();
        assert!(r.passed && (r.observed - 3.0 / 36.0).abs() < 1e-15);
        let r = check_log_concavity("k2", &Graph::complete(2)).unwrap();
        assert!(r.passed && r.observed == 0.0);
        let (ok, _) = log_concave(&[1, 1, 4].map(BigInt::from));
        assert!(!ok);
    }

    #[test]
    fn boosted_and_lemma1_on_triangle() {
        for c in [0.5, 1.0, 2.0] {
            let g = Graph::complete(3);
            let r = check_boosted_acceptance("k3", &g, c).unwrap();
            assert!(r.passed && r.observed > 0.5);
            assert!(check_lemma1("k3", &g, c).unwrap().passed);
        }
    }

    #[test]
    fn gadget_and_oracles() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        for eps in [0.1, 0.5] {
            assert!(check_gadget_closeness("a", &a, eps)
                .unwrap()
                .iter()
                .all(|r| r.passed));
        }
        let mut rng = rng_from_seed(5);
        assert!(check_permanent_oracles(20, 6, &mut rng).passed);
        let g = Graph::from_edges(4, [(0, 1, 0.5), (1, 2, 3.0), (2, 3, 1.0), (0, 3, 2.0)]).unwrap();
        assert!(check_hafnian_oracle("c4w", &g).unwrap().passed);
    }
}
