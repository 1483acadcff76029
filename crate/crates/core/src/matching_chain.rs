//! The Jerrum–Sinclair Metropolis chain on all matchings of a weighted graph.
//!
//! One step: with probability ½ hold; otherwise pick an edge `e` uniformly.
//! If `e` is matched, propose removing it; if both endpoints are free,
//! propose adding it; if exactly one endpoint is covered (by `e″`), propose
//! sliding `e″` to `e`. The proposal is accepted with probability
//! `min(1, w(M′)/w(M))` where `w(M) = Π λ_e`.
//!
//! Long runs use an equivalent skip-ahead simulation: in a state where the
//! total move probability is `p`, the number of holding steps before the next
//! move is geometric with parameter `p`, and the move itself is drawn in
//! proportion to its probability. The resulting state sequence has exactly
//! the law of step-by-step simulation.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Geometric};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, Matching};
use crate::seed::rng_from_seed;

pub(crate) const FREE: usize = usize::MAX;

/// Plain steps tried before switching to skip-ahead in a given state.
const PLAIN_TRIES: u64 = 8;

/// Reproducibility and run-length settings shared by every chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainConfig {
    pub seed: u64,
    pub epsilon: f64,
    /// Multiplier `C` on the asymptotic step count.
    pub step_constant: f64,
    pub max_steps_override: Option<u64>,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            epsilon: 0.05,
            step_constant: 1.0,
            max_steps_override: None,
        }
    }
}

impl ChainConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_epsilon(self.epsilon)?;
        if !(self.step_constant.is_finite() && self.step_constant > 0.0) {
            return Err(Error::InvalidInput(alloc::format!(
                "step constant must be positive, got {}",
                self.step_constant
            )));
        }
        if self.max_steps_override == Some(0) {
            return Err(Error::InvalidInput("max steps must be positive".into()));
        }
        Ok(())
    }
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(alloc::format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )))
    }
}

/// `⌈C · λ̄ · |E| · n² · ln(n·λ̄/ε)⌉` with `λ̄ = max(1, max λ_e)`, or the override.
pub fn required_steps(g: &Graph, epsilon: f64, config: &ChainConfig) -> u64 {
    if let Some(steps) = config.max_steps_override {
        return steps;
    }
    let n = g.vertex_count() as f64;
    let lambda = g.max_weight_or_one();
    let log = libm::log(n * lambda / epsilon).max(0.0);
    let steps = config.step_constant * lambda * g.edge_count() as f64 * n * n * log;
    (libm::ceil(steps) as u64).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Move {
    Hold,
    Add(EdgeId),
    Remove(EdgeId),
    /// Replace `remove` by `add`; the two edges share one endpoint.
    Slide {
        add: EdgeId,
        remove: EdgeId,
    },
}

/// A matching stored as per-vertex matched edge ids, plus the chain dynamics.
#[derive(Debug, Clone)]
pub struct MatchingWalk<'g> {
    g: &'g Graph,
    mate: Vec<usize>,
    size: usize,
    scratch: Vec<f64>,
    scratch_total: f64,
}

impl<'g> MatchingWalk<'g> {
    pub fn new(g: &'g Graph) -> Self {
        Self {
            g,
            mate: alloc::vec![FREE; g.vertex_count()],
            size: 0,
            scratch: alloc::vec![0.0; g.edge_count()],
            scratch_total: 0.0,
        }
    }

    pub fn from_matching(g: &'g Graph, m: &Matching) -> Self {
        let mut walk = Self::new(g);
        for &id in m.edges() {
            walk.set(id);
        }
        walk
    }

    pub fn reset(&mut self) {
        self.mate.fill(FREE);
        self.size = 0;
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn is_perfect(&self) -> bool {
        2 * self.size == self.g.vertex_count()
    }

    /// Matched edge at `v`, if any.
    pub fn mate_edge(&self, v: usize) -> Option<EdgeId> {
        let id = self.mate[v];
        (id != FREE).then_some(id)
    }

    /// Matched edge ids in increasing order.
    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        let g = self.g;
        (0..g.vertex_count()).filter_map(move |v| {
            let id = self.mate[v];
            (id != FREE && g.edge(id).u.min(g.edge(id).v) == v).then_some(id)
        })
    }

    pub fn to_matching(&self) -> Matching {
        let mut ids: Vec<EdgeId> = self.edge_ids().collect();
        ids.sort_unstable();
        Matching::from_sorted_unchecked(ids)
    }

    fn set(&mut self, id: EdgeId) {
        let e = self.g.edge(id);
        self.mate[e.u] = id;
        self.mate[e.v] = id;
        self.size += 1;
    }

    fn clear(&mut self, id: EdgeId) {
        let e = self.g.edge(id);
        self.mate[e.u] = FREE;
        self.mate[e.v] = FREE;
        self.size -= 1;
    }

    /// The move proposed by edge `id` and its Metropolis acceptance probability.
    pub(crate) fn propose(&self, id: EdgeId) -> (Move, f64) {
        let e = self.g.edge(id);
        let (mu, mv) = (self.mate[e.u], self.mate[e.v]);
        if mu == id {
            return (Move::Remove(id), (1.0 / e.weight).min(1.0));
        }
        let other = match (mu == FREE, mv == FREE) {
            (true, true) => return (Move::Add(id), e.weight.min(1.0)),
            (true, false) => mv,
            (false, true) => mu,
            (false, false) => return (Move::Hold, 0.0),
        };
        let ratio = e.weight / self.g.edge(other).weight;
        (
            Move::Slide {
                add: id,
                remove: other,
            },
            ratio.min(1.0),
        )
    }

    pub(crate) fn apply(&mut self, mv: Move) {
        match mv {
            Move::Hold => {}
            Move::Add(id) => self.set(id),
            Move::Remove(id) => self.clear(id),
            Move::Slide { add, remove } => {
                self.clear(remove);
                self.set(add);
            }
        }
    }

    /// One step of the chain; returns whether the state changed.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        let m = self.g.edge_count();
        if m == 0 {
            return false;
        }
        // One draw covers the lazy coin and the edge choice.
        let x = rng.random_range(0..2 * m);
        if x >= m {
            return false;
        }
        let (mv, accept) = self.propose(x);
        if mv == Move::Hold || !(accept >= 1.0 || rng.random::<f64>() < accept) {
            return false;
        }
        self.apply(mv);
        true
    }

    /// Refreshes the per-edge acceptance table and draws how many further
    /// steps the current state holds; `None` if it can never move.
    pub(crate) fn holding_time<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<u64> {
        let m = self.g.edge_count();
        let mut total = 0.0;
        for id in 0..m {
            let (mv, a) = self.propose(id);
            let a = if mv == Move::Hold { 0.0 } else { a };
            self.scratch[id] = a;
            total += a;
        }
        if total <= 0.0 {
            return None;
        }
        self.scratch_total = total;
        let p = (total / (2 * m) as f64).min(1.0);
        Some(
            Geometric::new(p)
                .expect("probability in (0, 1]")
                .sample(rng),
        )
    }

    /// Makes the move that ends a holding period, chosen in proportion to its
    /// acceptance; call right after [`Self::holding_time`].
    pub(crate) fn jump<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let m = self.g.edge_count();
        let mut u = rng.random::<f64>() * self.scratch_total;
        let mut chosen = m - 1;
        for id in 0..m {
            let a = self.scratch[id];
            if u < a {
                chosen = id;
                break;
            }
            u -= a;
        }
        // Floating-point leftovers can land past the last positive entry.
        while self.scratch[chosen] == 0.0 {
            chosen -= 1;
        }
        let (mv, _) = self.propose(chosen);
        self.apply(mv);
    }

    /// Advances the chain by exactly `steps` steps (in law).
    pub fn advance<R: Rng + ?Sized>(&mut self, steps: u64, rng: &mut R) {
        let m = self.g.edge_count();
        if m == 0 {
            return;
        }
        let mut remaining = steps;
        'outer: while remaining > 0 {
            for _ in 0..PLAIN_TRIES.min(remaining) {
                remaining -= 1;
                if self.step(rng) {
                    continue 'outer;
                }
            }
            if remaining == 0 {
                break;
            }
            let Some(holds) = self.holding_time(rng) else {
                break;
            };
            if holds >= remaining {
                break;
            }
            remaining -= holds + 1;
            self.jump(rng);
        }
        debug_assert!(Matching::new(self.g, self.edge_ids()).is_ok());
    }
}

/// A grid of inspection times on a persistent chain.
///
/// Stopping at the first perfect grid point after the previous stop gives
/// the chain `P^spacing` watched only on perfect matchings, whose stationary
/// law is the chain's stationary law conditioned on being perfect.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Checkpoints {
    spacing: u64,
    now: u64,
    last: Option<u64>,
}

impl Checkpoints {
    /// Starts the grid at time 0; the first stop is no earlier than `burn_in`.
    pub fn new(spacing: u64, burn_in: u64) -> Self {
        Self {
            spacing: spacing.max(1),
            now: 0,
            last: burn_in
                .checked_sub(1)
                .map(|b| b / spacing.max(1) * spacing.max(1)),
        }
    }

    pub fn spacing(&self) -> u64 {
        self.spacing
    }

    /// Steps simulated so far.
    pub fn now(&self) -> u64 {
        self.now
    }

    fn first_candidate(&self) -> u64 {
        let next = self.now.div_ceil(self.spacing) * self.spacing;
        match self.last {
            Some(last) => next.max(last + self.spacing),
            None => next,
        }
    }
}

impl MatchingWalk<'_> {
    /// Runs to the first perfect grid point after the previous stop. Returns
    /// the number of grid points inspected, or `Err` with that count once
    /// more than `budget` consecutive ones were not perfect.
    pub fn advance_to_perfect_checkpoint<R: Rng + ?Sized>(
        &mut self,
        grid: &mut Checkpoints,
        budget: u64,
        rng: &mut R,
    ) -> core::result::Result<u64, u64> {
        let mut inspected = 0u64;
        loop {
            let first = grid.first_candidate();
            let holds = if self.g.edge_count() == 0 {
                None
            } else {
                self.holding_time(rng)
            };
            let end = grid.now.saturating_add(holds.unwrap_or(u64::MAX));
            if first <= end {
                if self.is_perfect() {
                    grid.now = first;
                    grid.last = Some(first);
                    return Ok(inspected + 1);
                }
                inspected =
                    inspected.saturating_add(((end - first) / grid.spacing).saturating_add(1));
                if inspected > budget {
                    return Err(inspected);
                }
            }
            if holds.is_none() {
                return Err(inspected);
            }
            grid.now = end + 1;
            self.jump(rng);
        }
    }
}

/// One step of the chain from `m`.
pub fn chain_step<R: Rng + ?Sized>(m: &Matching, g: &Graph, rng: &mut R) -> Matching {
    let mut walk = MatchingWalk::from_matching(g, m);
    walk.step(rng);
    walk.to_matching()
}

/// Every state reachable from `m` in one step, with its probability (the
/// holding probability included); used to build explicit transition matrices.
pub fn transition_row(g: &Graph, m: &Matching) -> Vec<(Matching, f64)> {
    let edges = g.edge_count();
    if edges == 0 {
        return alloc::vec![(m.clone(), 1.0)];
    }
    let walk = MatchingWalk::from_matching(g, m);
    let mut row = Vec::new();
    let mut stay = 1.0;
    for id in 0..edges {
        let (mv, a) = walk.propose(id);
        if mv == Move::Hold || a == 0.0 {
            continue;
        }
        let p = 0.5 / edges as f64 * a;
        let mut next = walk.clone();
        next.apply(mv);
        row.push((next.to_matching(), p));
        stay -= p;
    }
    row.push((m.clone(), stay));
    row
}

/// One record of the optional diagnostics stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepRecord {
    pub step: u64,
    pub size: usize,
    pub accepted: bool,
}

/// Runs `steps` plain steps from the empty matching, reporting every step.
pub fn run_with_diagnostics<R: Rng + ?Sized>(
    g: &Graph,
    steps: u64,
    rng: &mut R,
    mut observe: impl FnMut(StepRecord),
) -> Matching {
    let mut walk = MatchingWalk::new(g);
    for step in 0..steps {
        let accepted = walk.step(rng);
        observe(StepRecord {
            step,
            size: walk.len(),
            accepted,
        });
    }
    walk.to_matching()
}

/// Draws matchings by running the chain from the empty matching for a fixed
/// number of steps per draw.
#[derive(Debug, Clone)]
pub struct MatchingSampler<'g> {
    walk: MatchingWalk<'g>,
    steps: u64,
}

impl<'g> MatchingSampler<'g> {
    pub fn new(g: &'g Graph, epsilon: f64, config: &ChainConfig) -> Result<Self> {
        config.validate()?;
        check_epsilon(epsilon)?;
        if g.vertex_count() == 0 {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        Ok(Self::with_steps(g, required_steps(g, epsilon, config)))
    }

    pub fn with_steps(g: &'g Graph, steps: u64) -> Self {
        Self {
            walk: MatchingWalk::new(g),
            steps,
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Runs a fresh chain and leaves its final state in [`Self::walk`].
    pub fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R) -> &MatchingWalk<'g> {
        self.walk.reset();
        self.walk.advance(self.steps, rng);
        &self.walk
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Matching {
        self.draw(rng).to_matching()
    }

    pub fn walk(&self) -> &MatchingWalk<'g> {
        &self.walk
    }
}

/// One matching drawn with the stream seeded by `config.seed`, targeting `config.epsilon`.
pub fn sample_matching(g: &Graph, config: &ChainConfig) -> Result<Matching> {
    let mut sampler = MatchingSampler::new(g, config.epsilon, config)?;
    Ok(sampler.sample(&mut rng_from_seed(config.seed)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{exact_matching_distribution, tv_distance, DistributionTable};
    use crate::seed::rng_from_seed;

    fn single_edge(weight: f64) -> Graph {
        Graph::from_edges(2, [(0, 1, weight)]).unwrap()
    }

    #[test]
    fn step_count_formula() {
        let cfg = ChainConfig::default();
        assert_eq!(required_steps(&single_edge(1.0), 0.1, &cfg), 12);
        let heavy = single_edge(2.0);
        let expect = libm::ceil(2.0 * 4.0 * libm::log(40.0)) as u64;
        assert_eq!(required_steps(&heavy, 0.1, &cfg), expect);
        let fixed = ChainConfig {
            max_steps_override: Some(1000),
            ..cfg
        };
        assert_eq!(required_steps(&Graph::complete(5), 0.1, &fixed), 1000);
    }

    #[test]
    fn config_validation() {
        assert!(ChainConfig::default().validate().is_ok());
        for bad in [
            ChainConfig {
                epsilon: 1.0,
                ..Default::default()
            },
            ChainConfig {
                step_constant: 0.0,
                ..Default::default()
            },
            ChainConfig {
                max_steps_override: Some(0),
                ..Default::default()
            },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn acceptance_probabilities() {
        let g = single_edge(3.0);
        let empty = MatchingWalk::new(&g);
        assert_eq!(empty.propose(0), (Move::Add(0), 1.0));
        let full = MatchingWalk::from_matching(&g, &Matching::new(&g, [0]).unwrap());
        assert_eq!(full.propose(0), (Move::Remove(0), 1.0 / 3.0));

        let path = Graph::from_edges(3, [(0, 1, 2.0), (1, 2, 0.5)]).unwrap();
        let m = Matching::new(&path, [0]).unwrap();
        let walk = MatchingWalk::from_matching(&path, &m);
        assert_eq!(walk.propose(1), (Move::Slide { add: 1, remove: 0 }, 0.25));
    }

    #[test]
    fn transition_rows_are_stochastic() {
        let g = Graph::cycle(4);
        for m in [
            Matching::empty(),
            Matching::new(&g, [0]).unwrap(),
            Matching::new(&g, [0, 2]).unwrap(),
        ] {
            let row = transition_row(&g, &m);
            let total: f64 = row.iter().map(|(_, p)| p).sum();
            assert!((total - 1.0).abs() < 1e-14);
            assert!(row.iter().all(|(_, p)| *p >= 0.0));
        }
    }

    #[test]
    fn skip_ahead_matches_plain_stepping() {
        let g = Graph::from_edges(4, [(0, 1, 3.0), (1, 2, 0.5), (2, 3, 2.0), (0, 3, 1.0)]).unwrap();
        let exact = exact_matching_distribution(&g).unwrap();
        let draws = 20_000;
        let steps = 60;
        let mut rng = rng_from_seed(11);
        let mut plain = MatchingWalk::new(&g);
        let mut plain_keys = Vec::new();
        let mut sampler = MatchingSampler::with_steps(&g, steps);
        let mut skip_keys = Vec::new();
        for _ in 0..draws {
            plain.reset();
            for _ in 0..steps {
                plain.step(&mut rng);
            }
            plain_keys.push(plain.to_matching().edges().to_vec());
            skip_keys.push(sampler.sample(&mut rng).edges().to_vec());
        }
        let p = DistributionTable::from_samples(plain_keys).unwrap();
        let s = DistributionTable::from_samples(skip_keys).unwrap();
        let noise = 3.0 * libm::sqrt(exact.len() as f64 / draws as f64);
        assert!(tv_distance(&p, &s) < noise, "{}", tv_distance(&p, &s));
    }

    #[test]
    fn seeded_runs_repeat() {
        let g = Graph::complete(4);
        let cfg = ChainConfig::with_seed(99);
        assert_eq!(sample_matching(&g, &cfg), sample_matching(&g, &cfg));
    }

    #[test]
    fn checkpoints_respect_burn_in_and_spacing() {
        let g = single_edge(1.0);
        let mut rng = rng_from_seed(5);
        let mut walk = MatchingWalk::new(&g);
        let mut grid = Checkpoints::new(7, 30);
        let mut prev = 0;
        for i in 0..50 {
            walk.advance_to_perfect_checkpoint(&mut grid, 1000, &mut rng)
                .unwrap();
            assert!(walk.is_perfect());
            assert_eq!(grid.now() % 7, 0);
            assert!(grid.now() >= 30);
            if i > 0 {
                assert!(grid.now() > prev);
            }
            prev = grid.now();
        }
        assert_eq!(Checkpoints::new(0, 0).spacing(), 1);
    }

    #[test]
    fn checkpoint_budget_on_graph_without_perfect_matching() {
        let g = Graph::complete(3);
        let mut rng = rng_from_seed(6);
        let mut walk = MatchingWalk::new(&g);
        let mut grid = Checkpoints::new(3, 10);
        let err = walk
            .advance_to_perfect_checkpoint(&mut grid, 20, &mut rng)
            .unwrap_err();
        assert!(err > 20);
        let g = Graph::new(2);
        let mut walk = MatchingWalk::new(&g);
        assert!(walk
            .advance_to_perfect_checkpoint(&mut Checkpoints::new(1, 0), 5, &mut rng)
            .is_err());
    }

    #[test]
    fn edgeless_graph_stays_empty() {
        let g = Graph::new(3);
        let m = sample_matching(&g, &ChainConfig::default()).unwrap();
        assert!(m.is_empty());
        assert!(sample_matching(&Graph::new(0), &ChainConfig::default()).is_err());
    }
}
