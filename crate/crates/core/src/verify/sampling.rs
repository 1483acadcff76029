//! Sampler-versus-table checks; these run the chains and take a seed.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use super::{check_empirical_tv, CorpusMatrix, VerificationReport};
use crate::bs::{BsRequest, BsSampler};
use crate::error::Result;
use crate::gbs::{GbsRequest, GbsSampler};
use crate::graph::Graph;
use crate::matching_chain::ChainConfig;
use crate::matrix::Matrix;
use crate::oracle::distribution::OutcomeKey;
use crate::oracle::{exact_bs_distribution, exact_gbs_distribution, DistributionTable};
use crate::seed::rng_from_seed;

/// Empirical GBS table from `samples` draws against the exact table.
pub fn check_gbs_sampler(
    item: &str,
    g: &Graph,
    c: f64,
    epsilon: f64,
    samples: u64,
    chain: &ChainConfig,
) -> Result<VerificationReport> {
    let target = exact_gbs_distribution(g, c)?;
    let mut sampler = GbsSampler::new(&GbsRequest::new(g.clone(), c, epsilon, *chain))?;
    let mut rng = rng_from_seed(chain.seed);
    let mut counts: BTreeMap<OutcomeKey, u64> = BTreeMap::new();
    sampler.for_each_sample(samples as usize, &mut rng, |s| {
        if let Some(n) = counts.get_mut(s) {
            *n += 1;
        } else {
            counts.insert(s.to_vec(), 1);
        }
    })?;
    let emp = DistributionTable::from_counts(counts, samples);
    let mut r = check_empirical_tv(item, &target, &emp, samples, epsilon);
    r.check_name = format!("tv-gbs-c{c}");
    Ok(r)
}

/// Empirical occupancy table from `samples` draws against the exact `μ_BS`.
pub fn check_bs_sampler(
    item: &str,
    a: &Matrix,
    epsilon: f64,
    samples: u64,
    chain: &ChainConfig,
) -> Result<VerificationReport> {
    let target = exact_bs_distribution(a)?;
    let mut sampler = BsSampler::new(&BsRequest::new(a.clone(), epsilon, *chain))?;
    let mut rng = rng_from_seed(chain.seed);
    let draws = sampler.sample_many(samples as usize, &mut rng)?;
    let emp = DistributionTable::from_samples(draws.into_iter().map(|z| z.0))?;
    let mut r = check_empirical_tv(item, &target, &emp, samples, epsilon);
    r.check_name = "tv-bs".into();
    Ok(r)
}

/// Fraction of perfect checkpoints of the boosted product chain, against
/// `1/4 − 3σ` with `σ = √(3/16 / trials)`.
pub fn check_acceptance_probe(
    item: &str,
    g: &Graph,
    c: f64,
    trials: u64,
    chain: &ChainConfig,
) -> Result<VerificationReport> {
    let sampler = GbsSampler::new(&GbsRequest::new(g.clone(), c, 0.05, *chain))?;
    let mut rng = rng_from_seed(chain.seed);
    let observed = sampler.probe_acceptance(trials, &mut rng);
    let bound = 0.25 - 3.0 * libm::sqrt(0.1875 / trials.max(1) as f64);
    Ok(VerificationReport::new(
        format!("acceptance-probe-c{c}"),
        item,
        bound,
        observed,
        observed >= bound,
    )
    .with_samples(trials))
}

/// Fixed matrices with at most 3 rows and 2 columns for end-to-end boson
/// sampling checks.
pub fn bs_sampling_matrices() -> Vec<CorpusMatrix> {
    let rows: [&[&[f64]]; 6] = [
        &[&[1.0]],
        &[&[1.0], &[2.0]],
        &[&[1.0], &[1.0], &[2.0]],
        &[&[1.0, 2.0], &[2.0, 1.0]],
        &[&[1.0, 0.0], &[1.0, 1.0]],
        &[&[0.0, 1.0], &[1.0, 2.0], &[2.0, 0.0]],
    ];
    rows.iter()
        .map(|r| {
            let matrix = Matrix::from_fn(r.len(), r[0].len(), |i, j| r[i][j]);
            CorpusMatrix {
                id: super::corpus::matrix_id(&matrix),
                matrix,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(seed: u64) -> ChainConfig {
        ChainConfig {
            step_constant: 0.05,
            ..ChainConfig::with_seed(seed)
        }
    }

    #[test]
    fn triangle_passes() {
        let r = check_gbs_sampler("k3", &Graph::complete(3), 1.0, 0.05, 20_000, &quick(1)).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.samples_used, 20_000);
        let r = check_acceptance_probe("k3", &Graph::complete(3), 1.0, 2_000, &quick(2)).unwrap();
        assert!(r.passed && r.observed > 0.5);
    }

    #[test]
    fn single_row_bs_passes() {
        let a = Matrix::from_rows(&[alloc::vec![1.0], alloc::vec![2.0]]).unwrap();
        let r = check_bs_sampler("a", &a, 0.2, 5_000, &quick(3)).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn fixed_matrices_are_small() {
        let all = bs_sampling_matrices();
        assert!(all
            .iter()
            .all(|c| c.matrix.rows() <= 3 && c.matrix.cols() <= 2));
        assert_eq!(all[3].id, "m2x2-1221");
    }
}
