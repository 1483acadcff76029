//! Sampling vertex subsets with probability proportional to
//! `c^{2|S|}·PM(S)²`: build `G □ K₂`, boost every weight by `4n²`, draw
//! matchings from the matching chain until one is perfect, and project.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSubset};
use crate::matching_chain::{
    check_epsilon, ChainConfig, Checkpoints, MatchingSampler, MatchingWalk,
};
use crate::product::{cartesian_product_k2, EdgeClass, ProductGraph};
use crate::seed::rng_from_seed;

/// Multiplies every product-graph weight by `4n²`, `n = |V(G)|`.
pub fn boost_weights(pg: &ProductGraph) -> Result<ProductGraph> {
    let n = pg.base_vertex_count().max(1) as f64;
    pg.scaled(4.0 * n * n)
}

/// The chain's share of the error budget: `ε′ = min(1/4, ε/2)`.
pub fn chain_epsilon(epsilon: f64) -> f64 {
    (epsilon / 2.0).min(0.25)
}

/// Consecutive non-perfect draws tolerated: `64·⌈log₂(1/ε)⌉`.
pub fn rejection_budget(epsilon: f64) -> u64 {
    64 * (libm::ceil(libm::log2(1.0 / epsilon)) as u64).max(1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbsRequest {
    pub graph: Graph,
    pub c: f64,
    pub epsilon: f64,
    pub chain: ChainConfig,
}

impl GbsRequest {
    pub fn new(graph: Graph, c: f64, epsilon: f64, chain: ChainConfig) -> Self {
        Self {
            graph,
            c,
            epsilon,
            chain,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::InvalidInput(alloc::format!(
                "c must be positive, got {}",
                self.c
            )));
        }
        if self.graph.vertex_count() == 0 {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        check_epsilon(self.epsilon)?;
        self.chain.validate()
    }
}

/// Draw counters of a [`GbsSampler`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GbsStats {
    pub samples: u64,
    /// Checkpoints inspected, perfect or not.
    pub draws: u64,
}

impl GbsStats {
    /// Fraction of inspected checkpoints that were perfect.
    pub fn acceptance_rate(&self) -> f64 {
        if self.draws == 0 {
            0.0
        } else {
            self.samples as f64 / self.draws as f64
        }
    }
}

/// Expected perfect-state holding periods between checkpoints.
pub const CHECKPOINT_HOLDS: u64 = 4;

/// `CHECKPOINT_HOLDS` times the longest mean holding time of a perfect
/// matching, `2|E′|·λ_max / (|V′|/2)`.
pub fn checkpoint_spacing(pg: &ProductGraph) -> u64 {
    let g = pg.graph();
    let lmax = g.edges().iter().map(|e| e.weight).fold(1.0, f64::max);
    let half = (g.vertex_count() / 2).max(1) as f64;
    let hold = libm::ceil(2.0 * g.edge_count() as f64 * lmax / half) as u64;
    CHECKPOINT_HOLDS * hold.max(1)
}

/// Reusable pipeline state for one request.
///
/// A batch runs one chain on the boosted product graph: `steps` steps of
/// burn-in, then inspection every `spacing` steps. Each sample is the first
/// perfect checkpoint after the previous one; more than `rejection_budget`
/// consecutive non-perfect checkpoints is an error.
#[derive(Debug, Clone)]
pub struct GbsSampler {
    product: ProductGraph,
    steps: u64,
    spacing: u64,
    budget: u64,
    stats: GbsStats,
}

impl GbsSampler {
    pub fn new(req: &GbsRequest) -> Result<Self> {
        req.validate()?;
        let product = boost_weights(&cartesian_product_k2(&req.graph, req.c)?)?;
        let eps = chain_epsilon(req.epsilon);
        let steps = MatchingSampler::new(product.graph(), eps, &req.chain)?.steps();
        Ok(Self {
            spacing: checkpoint_spacing(&product),
            product,
            steps,
            budget: rejection_budget(req.epsilon),
            stats: GbsStats::default(),
        })
    }

    /// The boosted product graph the chain runs on.
    pub fn product(&self) -> &ProductGraph {
        &self.product
    }

    /// Burn-in steps per batch.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn spacing(&self) -> u64 {
        self.spacing
    }

    pub fn with_spacing(mut self, spacing: u64) -> Self {
        self.spacing = spacing.max(1);
        self
    }

    pub fn rejection_budget(&self) -> u64 {
        self.budget
    }

    pub fn stats(&self) -> GbsStats {
        self.stats
    }

    /// Calls `visit` with each of `count` subsets (sorted vertex indices).
    pub fn for_each_sample<R: Rng + ?Sized>(
        &mut self,
        count: usize,
        rng: &mut R,
        mut visit: impl FnMut(&[usize]),
    ) -> Result<()> {
        let mut walk = MatchingWalk::new(self.product.graph());
        let mut grid = Checkpoints::new(self.spacing, self.steps);
        let mut members = Vec::new();
        for _ in 0..count {
            match walk.advance_to_perfect_checkpoint(&mut grid, self.budget, rng) {
                Ok(inspected) => {
                    self.stats.draws += inspected;
                    self.stats.samples += 1;
                    project_walk(&self.product, &walk, &mut members);
                    visit(&members);
                }
                Err(inspected) => {
                    self.stats.draws += inspected;
                    return Err(Error::RejectionBudgetExceeded { draws: self.budget });
                }
            }
        }
        Ok(())
    }

    pub fn sample_many<R: Rng + ?Sized>(
        &mut self,
        count: usize,
        rng: &mut R,
    ) -> Result<Vec<Vec<usize>>> {
        let mut out = Vec::with_capacity(count);
        self.for_each_sample(count, rng, |s| out.push(s.to_vec()))?;
        Ok(out)
    }

    /// One subset, as sorted vertex indices, from a fresh chain.
    pub fn sample_members<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Vec<usize>> {
        Ok(self.sample_many(1, rng)?.remove(0))
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<VertexSubset> {
        self.sample_members(rng).map(VertexSubset::new)
    }

    /// Fraction of `trials` checkpoints after burn-in at which the chain is
    /// perfect.
    pub fn probe_acceptance<R: Rng + ?Sized>(&self, trials: u64, rng: &mut R) -> f64 {
        let mut walk = MatchingWalk::new(self.product.graph());
        walk.advance(self.steps, rng);
        let mut hits = 0u64;
        for _ in 0..trials {
            walk.advance(self.spacing, rng);
            hits += u64::from(walk.is_perfect());
        }
        hits as f64 / trials.max(1) as f64
    }
}

fn project_walk(pg: &ProductGraph, walk: &MatchingWalk<'_>, out: &mut Vec<usize>) {
    out.clear();
    out.extend(
        walk.edge_ids()
            .filter(|&id| pg.edge_class(id) == EdgeClass::Original)
            .flat_map(|id| {
                let e = pg.graph().edge(id);
                [e.u, e.v]
            }),
    );
    out.sort_unstable();
}

/// One subset drawn with the stream seeded by `req.chain.seed`.
pub fn sample_gbs(req: &GbsRequest) -> Result<VertexSubset> {
    let mut rng = rng_from_seed(req.chain.seed);
    GbsSampler::new(req)?.sample(&mut rng)
}

/// Fraction of checkpoints on the boosted product chain that are perfect.
pub fn acceptance_rate_probe(req: &GbsRequest, trials: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let mut rng = rng_from_seed(req.chain.seed);
    Ok(GbsSampler::new(req)?.probe_acceptance(trials, &mut rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{
        exact_gbs_distribution, partition_profile, tv_distance, DistributionTable,
    };
    use crate::seed::rng_from_seed;

    #[test]
    fn boost_examples() {
        let pg = cartesian_product_k2(&Graph::complete(2), 1.0).unwrap();
        let b = boost_weights(&pg).unwrap();
        assert!(b.graph().edges().iter().all(|e| e.weight == 16.0));
        let pg = cartesian_product_k2(&Graph::complete(2), 0.5).unwrap();
        let b = boost_weights(&pg).unwrap();
        for (id, e) in b.graph().edges().iter().enumerate() {
            let expect = if b.edge_class(id) == EdgeClass::Rung {
                16.0
            } else {
                4.0
            };
            assert_eq!(e.weight, expect);
        }
    }

    #[test]
    fn budgets() {
        assert_eq!(chain_epsilon(0.05), 0.025);
        assert_eq!(chain_epsilon(0.9), 0.25);
        assert_eq!(rejection_budget(0.05), 64 * 5);
        assert_eq!(rejection_budget(0.5), 64);
    }

    #[test]
    fn k2_boosted_acceptance_ratio() {
        let pg = boost_weights(&cartesian_product_k2(&Graph::complete(2), 1.0).unwrap()).unwrap();
        let z = partition_profile(pg.graph()).unwrap();
        assert_eq!(z.z_by_size, [1.0, 64.0, 512.0]);
        assert!((z.z(2) / z.total - 512.0 / 577.0).abs() < 1e-15);
    }

    #[test]
    fn small_graph_end_to_end() {
        let cfg = ChainConfig {
            step_constant: 0.05,
            ..ChainConfig::with_seed(4)
        };
        let g = Graph::complete(3);
        let req = GbsRequest::new(g.clone(), 1.0, 0.05, cfg);
        let mut sampler = GbsSampler::new(&req).unwrap();
        let mut rng = rng_from_seed(4);
        let n = 20_000;
        let emp =
            DistributionTable::from_samples(sampler.sample_many(n, &mut rng).unwrap()).unwrap();
        let exact = exact_gbs_distribution(&g, 1.0).unwrap();
        let allowance = 0.05 + 3.0 * libm::sqrt(exact.len() as f64 / n as f64);
        assert!(tv_distance(&emp, &exact) <= allowance);
        assert!(sampler.stats().acceptance_rate() > 0.25);
    }

    #[test]
    fn odd_graphs_and_validation() {
        let req = GbsRequest::new(Graph::path(3), 1.0, 0.1, ChainConfig::default());
        let s = sample_gbs(&req).unwrap();
        assert_eq!(s.len() % 2, 0);
        let bad = GbsRequest::new(Graph::path(3), 0.0, 0.1, ChainConfig::default());
        assert!(sample_gbs(&bad).is_err());
        assert!(acceptance_rate_probe(&req, 0).is_err());
    }
}
