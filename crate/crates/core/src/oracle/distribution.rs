//! Finite probability tables keyed by canonical outcomes.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Outcome key: a sorted vertex list, a sorted edge-id list, or an occupancy vector.
pub type OutcomeKey = Vec<usize>;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DistributionTable {
    entries: BTreeMap<OutcomeKey, f64>,
    normalizer: Option<f64>,
}

impl DistributionTable {
    /// Normalizes non-negative weights. Zero-weight outcomes are dropped and
    /// repeated keys accumulate.
    pub fn from_weights(weights: impl IntoIterator<Item = (OutcomeKey, f64)>) -> Result<Self> {
        let mut entries: BTreeMap<OutcomeKey, f64> = BTreeMap::new();
        for (key, w) in weights {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidInput(alloc::format!(
                    "outcome weight must be finite and non-negative, got {w}"
                )));
            }
            if w > 0.0 {
                *entries.entry(key).or_insert(0.0) += w;
            }
        }
        let total: f64 = entries.values().sum();
        if total <= 0.0 {
            return Err(Error::ZeroNormalizer);
        }
        for p in entries.values_mut() {
            *p /= total;
        }
        Ok(Self {
            entries,
            normalizer: Some(total),
        })
    }

    /// Empirical frequencies of a sample stream.
    pub fn from_samples<I>(samples: I) -> Result<Self>
    where
        I: IntoIterator<Item = OutcomeKey>,
    {
        let mut counts: BTreeMap<OutcomeKey, u64> = BTreeMap::new();
        let mut n = 0u64;
        for s in samples {
            *counts.entry(s).or_insert(0) += 1;
            n += 1;
        }
        if n == 0 {
            return Err(Error::InvalidInput(
                "at least one sample is required".into(),
            ));
        }
        Ok(Self::from_counts(counts, n))
    }

    pub fn from_counts(counts: BTreeMap<OutcomeKey, u64>, n: u64) -> Self {
        let entries = counts
            .into_iter()
            .map(|(k, c)| (k, c as f64 / n as f64))
            .collect();
        Self {
            entries,
            normalizer: None,
        }
    }

    /// Wraps already-normalized probabilities as-is.
    pub fn from_probabilities(entries: BTreeMap<OutcomeKey, f64>, normalizer: Option<f64>) -> Self {
        Self {
            entries,
            normalizer,
        }
    }

    pub fn probability(&self, key: &[usize]) -> f64 {
        self.entries.get(key).copied().unwrap_or(0.0)
    }

    /// Total unnormalized weight, when the table was built from weights.
    pub fn normalizer(&self) -> Option<f64> {
        self.normalizer
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&OutcomeKey, f64)> {
        self.entries.iter().map(|(k, &p)| (k, p))
    }

    pub fn entries(&self) -> &BTreeMap<OutcomeKey, f64> {
        &self.entries
    }

    pub fn total_mass(&self) -> f64 {
        self.entries.values().sum()
    }

    /// Largest absolute per-outcome difference.
    pub fn max_deviation(&self, other: &Self) -> f64 {
        self.union_keys(other)
            .map(|k| (self.probability(k) - other.probability(k)).abs())
            .fold(0.0, f64::max)
    }

    fn union_keys<'a>(&'a self, other: &'a Self) -> impl Iterator<Item = &'a OutcomeKey> {
        self.entries.keys().chain(
            other
                .entries
                .keys()
                .filter(move |k| !self.entries.contains_key(*k)),
        )
    }

    /// Pushes the table forward through `f`, merging keys that collide.
    pub fn map_keys(&self, mut f: impl FnMut(&OutcomeKey) -> OutcomeKey) -> Self {
        let mut entries: BTreeMap<OutcomeKey, f64> = BTreeMap::new();
        for (k, &p) in &self.entries {
            *entries.entry(f(k)).or_insert(0.0) += p;
        }
        Self {
            entries,
            normalizer: self.normalizer,
        }
    }

    /// Cumulative table for inverse-CDF sampling.
    pub fn sampler(&self) -> TableSampler<'_> {
        let mut cumulative = Vec::with_capacity(self.entries.len());
        let mut keys = Vec::with_capacity(self.entries.len());
        let mut acc = 0.0;
        for (k, &p) in &self.entries {
            acc += p;
            cumulative.push(acc);
            keys.push(k);
        }
        TableSampler { keys, cumulative }
    }
}

/// Draws keys of a [`DistributionTable`] by inverse CDF.
pub struct TableSampler<'a> {
    keys: Vec<&'a OutcomeKey>,
    cumulative: Vec<f64>,
}

impl<'a> TableSampler<'a> {
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> &'a OutcomeKey {
        let total = self.cumulative.last().copied().unwrap_or(0.0);
        let u = rng.random::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= u);
        self.keys[i.min(self.keys.len() - 1)]
    }
}

/// `½ Σ |p(ω) − q(ω)|`; keys missing from one table count as probability 0.
pub fn tv_distance(p: &DistributionTable, q: &DistributionTable) -> f64 {
    let sum: f64 = p
        .union_keys(q)
        .map(|k| (p.probability(k) - q.probability(k)).abs())
        .sum();
    (0.5 * sum).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::SeedableRng;

    fn table(pairs: &[(usize, f64)]) -> DistributionTable {
        DistributionTable::from_weights(pairs.iter().map(|&(k, w)| (vec![k], w))).unwrap()
    }

    #[test]
    fn tv_examples() {
        let a = table(&[(0, 0.5), (1, 0.5)]);
        let b = table(&[(0, 0.75), (1, 0.25)]);
        assert_eq!(tv_distance(&a, &a), 0.0);
        assert_eq!(tv_distance(&a, &b), 0.25);
        assert_eq!(tv_distance(&b, &a), 0.25);
        assert_eq!(tv_distance(&table(&[(0, 1.0)]), &table(&[(1, 1.0)])), 1.0);
    }

    #[test]
    fn empirical_frequencies() {
        let t = DistributionTable::from_samples([vec![1], vec![1], vec![2], vec![2]]).unwrap();
        assert_eq!(t.probability(&[1]), 0.5);
        assert_eq!(t.probability(&[2]), 0.5);
        let single = DistributionTable::from_samples([vec![7]]).unwrap();
        assert_eq!(single.probability(&[7]), 1.0);
        assert!(DistributionTable::from_samples(Vec::<OutcomeKey>::new()).is_err());
    }

    #[test]
    fn weights_normalize() {
        let t = table(&[(0, 1.0), (1, 3.0), (2, 0.0)]);
        assert_eq!(t.len(), 2);
        assert_eq!(t.normalizer(), Some(4.0));
        assert!((t.total_mass() - 1.0).abs() < 1e-15);
        assert_eq!(
            DistributionTable::from_weights([(vec![0], 0.0)]),
            Err(Error::ZeroNormalizer)
        );
    }

    #[test]
    fn inverse_cdf_sampler() {
        let t = table(&[(0, 1.0), (1, 3.0)]);
        let s = t.sampler();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let draws = 40_000;
        let ones = (0..draws).filter(|_| s.sample(&mut rng)[0] == 1).count();
        let f = ones as f64 / draws as f64;
        assert!((f - 0.75).abs() < 0.01, "{f}");
    }
}
