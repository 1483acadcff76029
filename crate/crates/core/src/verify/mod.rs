//! Runnable checks: inequalities on partition functions, exact-oracle
//! comparisons, chain transition matrices and sampler-vs-table distances.

mod chains;
mod checks;
mod corpus;
mod sampling;

use alloc::string::String;

use crate::error::Result;
use crate::oracle::distribution::OutcomeKey;
use crate::oracle::{tv_distance, DistributionTable};

pub use chains::{check_matching_chain, check_pm_chain, stationary_vector};
pub use checks::{
    check_boosted_acceptance, check_gadget_closeness, check_hafnian_oracle, check_lemma1,
    check_lemma2, check_log_concavity, check_permanent_oracles,
};
pub use corpus::{
    connected_graphs, matrix_corpus, pm_chain_corpus, CorpusGraph, CorpusMatrix, CORPUS_MAX_N,
};
pub use sampling::{
    bs_sampling_matrices, check_acceptance_probe, check_bs_sampler, check_gbs_sampler,
};

/// One check on one corpus item.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub check_name: String,
    pub corpus_item: String,
    pub claimed_bound: f64,
    pub observed: f64,
    pub passed: bool,
    pub samples_used: u64,
}

impl VerificationReport {
    pub fn new(
        check_name: impl Into<String>,
        corpus_item: impl Into<String>,
        claimed_bound: f64,
        observed: f64,
        passed: bool,
    ) -> Self {
        Self {
            check_name: check_name.into(),
            corpus_item: corpus_item.into(),
            claimed_bound,
            observed,
            passed,
            samples_used: 0,
        }
    }

    /// `observed ≤ bound`.
    pub fn at_most(
        check_name: impl Into<String>,
        corpus_item: impl Into<String>,
        bound: f64,
        observed: f64,
    ) -> Self {
        Self::new(check_name, corpus_item, bound, observed, observed <= bound)
    }

    pub fn with_samples(mut self, samples: u64) -> Self {
        self.samples_used = samples;
        self
    }
}

/// Frequency table of a sample stream; an empty stream is an error.
pub fn empirical_distribution<I>(samples: I) -> Result<DistributionTable>
where
    I: IntoIterator<Item = OutcomeKey>,
{
    DistributionTable::from_samples(samples)
}

/// `ε + 3·√(|support| / samples)`.
pub fn tv_allowance(epsilon: f64, support: usize, samples: u64) -> f64 {
    epsilon + 3.0 * libm::sqrt(support as f64 / samples.max(1) as f64)
}

/// Passes iff the empirical table of `samples` is within [`tv_allowance`] of `target`.
pub fn check_sampler_tv<I>(
    corpus_item: impl Into<String>,
    target: &DistributionTable,
    samples: I,
    epsilon: f64,
) -> Result<VerificationReport>
where
    I: IntoIterator<Item = OutcomeKey>,
{
    let mut n = 0u64;
    let emp = empirical_distribution(samples.into_iter().inspect(|_| n += 1))?;
    Ok(check_empirical_tv(corpus_item, target, &emp, n, epsilon))
}

/// [`check_sampler_tv`] for an already tabulated sample of size `samples`.
pub fn check_empirical_tv(
    corpus_item: impl Into<String>,
    target: &DistributionTable,
    empirical: &DistributionTable,
    samples: u64,
    epsilon: f64,
) -> VerificationReport {
    let bound = tv_allowance(epsilon, target.len(), samples);
    VerificationReport::at_most(
        "sampler-tv",
        corpus_item,
        bound,
        tv_distance(empirical, target),
    )
    .with_samples(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;
    use alloc::vec;
    use alloc::vec::Vec;

    #[test]
    fn empirical_examples() {
        let t = empirical_distribution([vec![0], vec![0], vec![1], vec![1]]).unwrap();
        assert_eq!(t.probability(&[0]), 0.5);
        let t = empirical_distribution([vec![7]]).unwrap();
        assert_eq!(t.probability(&[7]), 1.0);
        assert!(empirical_distribution(Vec::<OutcomeKey>::new()).is_err());
    }

    #[test]
    fn point_mass_fails_against_uniform() {
        let uniform = DistributionTable::from_weights([(vec![0], 1.0), (vec![1], 1.0)]).unwrap();
        let r = check_sampler_tv("coin", &uniform, (0..100_000).map(|_| vec![0]), 0.3).unwrap();
        assert!(!r.passed);
        assert!((r.observed - 0.5).abs() < 1e-12);
        assert_eq!(r.samples_used, 100_000);
    }

    #[test]
    fn allowance_false_failure_rate() {
        // Resampling the target itself: the 3σ allowance must almost never trip.
        let target =
            DistributionTable::from_weights((0..6).map(|i| (vec![i], (i + 1) as f64))).unwrap();
        let sampler = target.sampler();
        let mut rng = rng_from_seed(11);
        let failures = (0..100)
            .filter(|_| {
                let draws: Vec<OutcomeKey> = (0..2_000)
                    .map(|_| sampler.sample(&mut rng).clone())
                    .collect();
                !check_sampler_tv("resample", &target, draws, 0.0)
                    .unwrap()
                    .passed
            })
            .count();
        assert!(failures <= 2, "{failures} false failures");
    }
}
