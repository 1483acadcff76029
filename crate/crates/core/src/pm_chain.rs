//! Perfect-matching sampler for bipartite graphs: a Metropolis chain over
//! perfect and near-perfect matchings in which every near-perfect matching
//! with holes `(u, v)` is reweighted by a hole weight `w(u, v)`.
//!
//! With the ideal weights `w(u, v) = Perm(B) / Perm(B − u − v)` every hole
//! class carries the same total mass as the perfect matchings, so the chain
//! can travel between perfect matchings through near-perfect states.
//!
//! Proposals are uniform over the edges in every state and each step is lazy
//! with probability ½, which keeps the proposal symmetric:
//!
//! * perfect state: a matched edge is proposed for removal, anything else holds;
//! * holes `(u, v)`: the edge `(u, v)` is proposed for addition, an edge
//!   `(u, y)` or `(x, v)` at exactly one hole slides the edge currently covering
//!   its other endpoint, anything else holds.
//!
//! Acceptance uses `Λ(M) = w_λ(M)` for perfect and `w_λ(M)·w(holes)` for
//! near-perfect states.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Geometric};

use crate::bipartite::{BipartiteGraph, Side};
use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, Matching};
use crate::matching_chain::{check_epsilon, required_steps, ChainConfig, FREE};
use crate::oracle::permanent::{permanent, RYSER_MAX};

/// Largest part size for hole weights by explicit minor permanents.
pub const EXACT_HOLE_WEIGHT_MAX_PART: usize = 12;

const PLAIN_TRIES: u64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightMode {
    /// Ratios of permanents, computed exactly.
    OracleExact,
    /// Estimated by a simulated-annealing schedule.
    Annealed,
}

/// Dense table of hole weights indexed by (left position, right position);
/// 0 marks a hole pair with no near-perfect matching.
#[derive(Debug, Clone, PartialEq)]
pub struct HoleWeights {
    part: usize,
    position: Vec<usize>,
    side: Vec<Side>,
    w: Vec<f64>,
    mode: WeightMode,
}

impl HoleWeights {
    pub fn empty(bg: &BipartiteGraph, mode: WeightMode) -> Result<Self> {
        let part = bg.part_size()?;
        let n = bg.graph().vertex_count();
        Ok(Self {
            part,
            position: (0..n).map(|v| bg.position(v)).collect(),
            side: bg.sides().to_vec(),
            w: alloc::vec![0.0; part * part],
            mode,
        })
    }

    pub fn mode(&self) -> WeightMode {
        self.mode
    }

    pub fn part_size(&self) -> usize {
        self.part
    }

    #[inline]
    fn index(&self, u: usize, v: usize) -> usize {
        debug_assert!(self.side[u] == Side::Left && self.side[v] == Side::Right);
        self.position[u] * self.part + self.position[v]
    }

    /// Weight of holes at left vertex `u` and right vertex `v` (0 if omitted).
    #[inline]
    pub fn raw(&self, u: usize, v: usize) -> f64 {
        self.w[self.index(u, v)]
    }

    pub fn get(&self, u: usize, v: usize) -> Option<f64> {
        let w = self.raw(u, v);
        (w > 0.0).then_some(w)
    }

    pub fn set(&mut self, u: usize, v: usize, weight: f64) {
        let i = self.index(u, v);
        self.w[i] = weight;
    }

    /// Hole pairs with a stored weight.
    pub fn supported_pairs(&self) -> usize {
        self.w.iter().filter(|&&w| w > 0.0).count()
    }

    /// `(left position, right position, weight)` for every stored pair.
    pub fn iter_positions(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.w
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(move |(i, &w)| (i / self.part, i % self.part, w))
    }

    /// Largest ratio `max(a/b, b/a)` over pairs stored in either table.
    pub fn max_ratio(&self, other: &Self) -> f64 {
        self.w
            .iter()
            .zip(&other.w)
            .filter(|(a, b)| **a > 0.0 || **b > 0.0)
            .map(|(&a, &b)| {
                if a > 0.0 && b > 0.0 {
                    (a / b).max(b / a)
                } else {
                    f64::INFINITY
                }
            })
            .fold(1.0, f64::max)
    }
}

/// `w(u, v) = Perm(B) / Perm(B with row u and column v removed)` by Ryser's formula.
pub fn compute_hole_weights_exact(bg: &BipartiteGraph) -> Result<HoleWeights> {
    let part = bg.part_size()?;
    if part > EXACT_HOLE_WEIGHT_MAX_PART {
        return Err(Error::SizeLimit {
            what: "part size for exact hole weights",
            size: part,
            limit: EXACT_HOLE_WEIGHT_MAX_PART.min(RYSER_MAX),
        });
    }
    let b = bg.biadjacency();
    let full = permanent(&b)?;
    if full <= 0.0 {
        return Err(Error::NoPerfectMatching);
    }
    let mut hw = HoleWeights::empty(bg, WeightMode::OracleExact)?;
    for &u in bg.left() {
        for &v in bg.right() {
            let minor = permanent(&b.minor(bg.position(u), bg.position(v)))?;
            if minor > 0.0 {
                hw.set(u, v, full / minor);
            }
        }
    }
    Ok(hw)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PmMove {
    Hold,
    /// Remove a matched edge, creating holes at its endpoints.
    Remove(EdgeId),
    /// Add the edge joining the two holes.
    Add(EdgeId),
    /// Add `add` at one hole and drop `remove`, which covered `add`'s other endpoint.
    Slide {
        add: EdgeId,
        remove: EdgeId,
    },
}

/// Chain state: matched edge per vertex and the current holes.
#[derive(Debug, Clone)]
pub struct PmWalk<'a> {
    g: &'a Graph,
    hw: &'a HoleWeights,
    mate: Vec<usize>,
    holes: Option<(usize, usize)>,
    moves: Vec<(EdgeId, f64)>,
}

impl<'a> PmWalk<'a> {
    /// Starts from a perfect or near-perfect matching of `bg`.
    pub fn new(bg: &'a BipartiteGraph, hw: &'a HoleWeights, start: &Matching) -> Result<Self> {
        let g = bg.graph();
        let mut mate = alloc::vec![FREE; g.vertex_count()];
        for &id in start.edges() {
            let e = g.edge(id);
            mate[e.u] = id;
            mate[e.v] = id;
        }
        let free: Vec<usize> = (0..g.vertex_count()).filter(|&v| mate[v] == FREE).collect();
        let holes = match free.as_slice() {
            [] => None,
            [a, b] => match bg.side(*a) {
                Side::Left if bg.side(*b) == Side::Right => Some((*a, *b)),
                Side::Right if bg.side(*b) == Side::Left => Some((*b, *a)),
                _ => return Err(Error::NotPerfect { unmatched: 2 }),
            },
            _ => {
                return Err(Error::NotPerfect {
                    unmatched: free.len(),
                })
            }
        };
        Ok(Self {
            g,
            hw,
            mate,
            holes,
            moves: Vec::new(),
        })
    }

    pub fn is_perfect(&self) -> bool {
        self.holes.is_none()
    }

    /// Current holes `(left, right)`, if the state is near-perfect.
    pub fn holes(&self) -> Option<(usize, usize)> {
        self.holes
    }

    pub fn to_matching(&self) -> Matching {
        let mut ids: Vec<EdgeId> = (0..self.g.vertex_count())
            .filter_map(|v| {
                let id = self.mate[v];
                (id != FREE && self.g.edge(id).u == v).then_some(id)
            })
            .collect();
        ids.sort_unstable();
        Matching::from_sorted_unchecked(ids)
    }

    pub fn matched_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.g.vertex_count()).filter_map(|v| {
            let id = self.mate[v];
            (id != FREE && self.g.edge(id).u == v).then_some(id)
        })
    }

    fn propose(&self, id: EdgeId) -> (PmMove, f64) {
        let e = self.g.edge(id);
        let (a, b) = (e.u, e.v);
        let Some((hu, hv)) = self.holes else {
            if self.mate[a] == id {
                let ratio = self.hw.raw(a, b) / e.weight;
                return (PmMove::Remove(id), ratio.min(1.0));
            }
            return (PmMove::Hold, 0.0);
        };
        let current = self.hw.raw(hu, hv);
        if a == hu && b == hv {
            return (PmMove::Add(id), (e.weight / current).min(1.0));
        }
        let (remove, new_holes) = if a == hu {
            let f = self.mate[b];
            (f, (self.g.edge(f).u, hv))
        } else if b == hv {
            let f = self.mate[a];
            (f, (hu, self.g.edge(f).v))
        } else {
            return (PmMove::Hold, 0.0);
        };
        let target = self.hw.raw(new_holes.0, new_holes.1);
        let ratio = e.weight * target / (self.g.edge(remove).weight * current);
        (PmMove::Slide { add: id, remove }, ratio.min(1.0))
    }

    fn apply(&mut self, mv: PmMove) {
        match mv {
            PmMove::Hold => {}
            PmMove::Remove(id) => {
                let e = self.g.edge(id);
                self.mate[e.u] = FREE;
                self.mate[e.v] = FREE;
                self.holes = Some((e.u, e.v));
            }
            PmMove::Add(id) => {
                let e = self.g.edge(id);
                self.mate[e.u] = id;
                self.mate[e.v] = id;
                self.holes = None;
            }
            PmMove::Slide { add, remove } => {
                let (hu, hv) = self.holes.expect("slides start near-perfect");
                let r = *self.g.edge(remove);
                self.mate[r.u] = FREE;
                self.mate[r.v] = FREE;
                let e = *self.g.edge(add);
                self.mate[e.u] = add;
                self.mate[e.v] = add;
                self.holes = Some(if e.u == hu { (r.u, hv) } else { (hu, r.v) });
            }
        }
    }

    /// One step; returns whether the state changed.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        let m = self.g.edge_count();
        let x = rng.random_range(0..2 * m);
        if x >= m {
            return false;
        }
        let (mv, a) = self.propose(x);
        if mv == PmMove::Hold || !(a >= 1.0 || rng.random::<f64>() < a) {
            return false;
        }
        self.apply(mv);
        true
    }

    /// Edges whose proposal can change the state: matched edges when perfect,
    /// edges at a hole otherwise.
    fn collect_moves(&mut self) -> f64 {
        let mut moves = core::mem::take(&mut self.moves);
        moves.clear();
        let mut total = 0.0;
        let mut push = |walk: &Self, id: EdgeId| {
            let (mv, a) = walk.propose(id);
            if mv != PmMove::Hold && a > 0.0 {
                moves.push((id, a));
                total += a;
            }
        };
        match self.holes {
            None => {
                for id in self.matched_edges() {
                    push(self, id);
                }
            }
            Some((hu, hv)) => {
                for &(_, id) in self.g.neighbors(hu) {
                    push(self, id);
                }
                for &(y, id) in self.g.neighbors(hv) {
                    if y != hu {
                        push(self, id);
                    }
                }
            }
        }
        self.moves = moves;
        total
    }

    /// Advances by exactly `steps` steps in law, skipping runs of holds.
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
            let total = self.collect_moves();
            if total <= 0.0 {
                break;
            }
            let p = (total / (2 * m) as f64).min(1.0);
            let holds = Geometric::new(p)
                .expect("probability in (0, 1]")
                .sample(rng);
            if holds >= remaining {
                break;
            }
            remaining -= holds + 1;
            let mut u = rng.random::<f64>() * total;
            let mut chosen = self.moves[self.moves.len() - 1].0;
            for &(id, a) in &self.moves {
                if u < a {
                    chosen = id;
                    break;
                }
                u -= a;
            }
            let (mv, _) = self.propose(chosen);
            self.apply(mv);
        }
    }

    /// Advances by `steps`, adding the number of steps spent in each state
    /// class to `occupancy` (indexed by `left_pos·part + right_pos`, with the
    /// perfect class in the last slot). Used by the annealing schedule.
    fn advance_recording<R: Rng + ?Sized>(
        &mut self,
        steps: u64,
        rng: &mut R,
        position: &[usize],
        part: usize,
        occupancy: &mut [f64],
    ) {
        let m = self.g.edge_count();
        let mut remaining = steps;
        while remaining > 0 {
            let class = match self.holes {
                None => part * part,
                Some((u, v)) => position[u] * part + position[v],
            };
            let total = self.collect_moves();
            if total <= 0.0 {
                occupancy[class] += remaining as f64;
                break;
            }
            let p = (total / (2 * m) as f64).min(1.0);
            let holds = Geometric::new(p)
                .expect("probability in (0, 1]")
                .sample(rng);
            if holds >= remaining {
                occupancy[class] += remaining as f64;
                break;
            }
            occupancy[class] += (holds + 1) as f64;
            remaining -= holds + 1;
            let mut u = rng.random::<f64>() * total;
            let mut chosen = self.moves[self.moves.len() - 1].0;
            for &(id, a) in &self.moves {
                if u < a {
                    chosen = id;
                    break;
                }
                u -= a;
            }
            let (mv, _) = self.propose(chosen);
            self.apply(mv);
        }
    }
}

/// One chain step from `m`.
pub fn pm_chain_step<R: Rng + ?Sized>(
    m: &Matching,
    bg: &BipartiteGraph,
    hw: &HoleWeights,
    rng: &mut R,
) -> Result<Matching> {
    let mut walk = PmWalk::new(bg, hw, m)?;
    walk.step(rng);
    Ok(walk.to_matching())
}

/// Every state reachable from `m` in one step with its probability.
pub fn pm_transition_row(
    bg: &BipartiteGraph,
    hw: &HoleWeights,
    m: &Matching,
) -> Result<Vec<(Matching, f64)>> {
    let walk = PmWalk::new(bg, hw, m)?;
    let edges = bg.graph().edge_count();
    let mut row = Vec::new();
    let mut stay = 1.0;
    for id in 0..edges {
        let (mv, a) = walk.propose(id);
        if mv == PmMove::Hold || a == 0.0 {
            continue;
        }
        let p = 0.5 / edges as f64 * a;
        let mut next = walk.clone();
        next.apply(mv);
        row.push((next.to_matching(), p));
        stay -= p;
    }
    row.push((m.clone(), stay));
    Ok(row)
}

/// `Λ(M)`: the stationary weight of a perfect or near-perfect state.
pub fn pm_state_weight(bg: &BipartiteGraph, hw: &HoleWeights, m: &Matching) -> Result<f64> {
    let walk = PmWalk::new(bg, hw, m)?;
    let w = m.weight(bg.graph());
    Ok(match walk.holes() {
        None => w,
        Some((u, v)) => w * hw.raw(u, v),
    })
}

/// Default retry budget: `64·⌈ln(1/ε)⌉` times the expected number of
/// checkpoints per perfect visit, which is about `#hole pairs + 1`.
pub fn default_retry_budget(epsilon: f64, hw: &HoleWeights) -> u64 {
    let base = 64 * libm::ceil(libm::log(1.0 / epsilon)).max(1.0) as u64;
    base * (hw.supported_pairs() as u64 + 1)
}

/// Checkpoint spacing: the mean time a perfect state holds before one of its
/// `part` matched edges is proposed, `⌈2|E| / part⌉`.
pub fn checkpoint_spacing(bg: &BipartiteGraph) -> u64 {
    let part = bg.left().len().max(1) as u64;
    (2 * bg.graph().edge_count() as u64).div_ceil(part).max(1)
}

/// Outcome counters of a [`PmSampler`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PmStats {
    pub samples: u64,
    /// Checkpoints inspected, perfect or not.
    pub checkpoints: u64,
    /// Chain steps simulated, burn-in included.
    pub steps: u64,
}

/// Draws perfect matchings from one persistent chain.
///
/// The chain starts at a perfect matching and runs `burn_in` steps. It is
/// then inspected every `spacing` steps; a draw returns the first perfect
/// checkpoint after the previous draw, discarding non-perfect ones. The
/// perfect checkpoints form the chain `P^spacing` watched only on the perfect
/// set, whose stationary law is the stationary law conditioned on being
/// perfect, i.e. `μ_PM`.
#[derive(Debug, Clone)]
pub struct PmSampler<'a> {
    walk: PmWalk<'a>,
    burn_in: u64,
    spacing: u64,
    retry_budget: u64,
    /// Steps simulated so far.
    now: u64,
    /// Time of the last returned checkpoint.
    last: Option<u64>,
    stats: PmStats,
}

impl<'a> PmSampler<'a> {
    pub fn new(
        bg: &'a BipartiteGraph,
        hw: &'a HoleWeights,
        epsilon: f64,
        config: &ChainConfig,
        retry_budget: Option<u64>,
    ) -> Result<Self> {
        config.validate()?;
        check_epsilon(epsilon)?;
        bg.part_size()?;
        let start = bg.find_perfect_matching().ok_or(Error::NoPerfectMatching)?;
        let burn_in = required_steps(bg.graph(), epsilon, config);
        let budget = retry_budget.unwrap_or_else(|| default_retry_budget(epsilon, hw));
        Self::from_parts(bg, hw, &start, burn_in, budget)
    }

    /// Assembles a sampler from precomputed parts; `start` must be a perfect
    /// or near-perfect matching of `bg`.
    pub fn from_parts(
        bg: &'a BipartiteGraph,
        hw: &'a HoleWeights,
        start: &Matching,
        burn_in: u64,
        retry_budget: u64,
    ) -> Result<Self> {
        Ok(Self {
            walk: PmWalk::new(bg, hw, start)?,
            burn_in,
            spacing: checkpoint_spacing(bg),
            retry_budget,
            now: 0,
            last: None,
            stats: PmStats::default(),
        })
    }

    pub fn burn_in(&self) -> u64 {
        self.burn_in
    }

    pub fn spacing(&self) -> u64 {
        self.spacing
    }

    pub fn retry_budget(&self) -> u64 {
        self.retry_budget
    }

    pub fn stats(&self) -> PmStats {
        self.stats
    }

    /// Advances to the next perfect checkpoint and hands the state to `f`.
    pub fn draw_with<R: Rng + ?Sized, T>(
        &mut self,
        rng: &mut R,
        f: impl FnOnce(&PmWalk<'a>) -> T,
    ) -> Result<T> {
        if self.last.is_none() && self.now < self.burn_in {
            self.walk.advance(self.burn_in - self.now, rng);
            self.stats.steps += self.burn_in - self.now;
            self.now = self.burn_in;
        }
        let spacing = self.spacing;
        let m = self.walk.g.edge_count();
        let mut inspected = 0u64;
        loop {
            let next_grid = self.now.div_ceil(spacing) * spacing;
            let first = match self.last {
                Some(last) => next_grid.max(last + spacing),
                None => next_grid,
            };
            let total = if m == 0 {
                0.0
            } else {
                self.walk.collect_moves()
            };
            // The current state persists through steps now..=now+holds.
            let holds = if total <= 0.0 {
                u64::MAX
            } else {
                let p = (total / (2 * m) as f64).min(1.0);
                Geometric::new(p)
                    .expect("probability in (0, 1]")
                    .sample(rng)
            };
            let end = self.now.saturating_add(holds);
            if first <= end {
                if self.walk.is_perfect() {
                    inspected += 1;
                    self.stats.checkpoints += inspected;
                    self.stats.steps += first - self.now;
                    self.stats.samples += 1;
                    self.now = first;
                    self.last = Some(first);
                    // Holding is memoryless, so the remaining hold is redrawn next time.
                    return Ok(f(&self.walk));
                }
                inspected = inspected.saturating_add(((end - first) / spacing).saturating_add(1));
                if inspected > self.retry_budget {
                    self.stats.checkpoints += inspected;
                    return Err(Error::RetryBudgetExceeded {
                        attempts: self.retry_budget,
                    });
                }
            }
            if holds == u64::MAX {
                return Err(Error::RetryBudgetExceeded {
                    attempts: self.retry_budget,
                });
            }
            self.stats.steps += holds + 1;
            self.now = end + 1;
            let mut u = rng.random::<f64>() * total;
            let moves = &self.walk.moves;
            let mut chosen = moves[moves.len() - 1].0;
            for &(id, a) in moves {
                if u < a {
                    chosen = id;
                    break;
                }
                u -= a;
            }
            let (mv, _) = self.walk.propose(chosen);
            self.walk.apply(mv);
        }
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Matching> {
        self.draw_with(rng, PmWalk::to_matching)
    }
}

/// One perfect matching drawn with the stream seeded by `config.seed`.
pub fn sample_perfect_matching(
    bg: &BipartiteGraph,
    hw: &HoleWeights,
    epsilon: f64,
    config: &ChainConfig,
) -> Result<Matching> {
    let mut rng = crate::seed::rng_from_seed(config.seed);
    PmSampler::new(bg, hw, epsilon, config, None)?.sample(&mut rng)
}

/// Settings for [`anneal_hole_weights`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealSchedule {
    pub stages: usize,
    /// Chain moves recorded per state class at each stage.
    pub moves_per_class: u64,
    /// Activity given to non-edges at the start; it decays geometrically to
    /// `floor` before the last stage drops non-edges entirely.
    pub floor: f64,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        Self {
            stages: 12,
            moves_per_class: 400,
            floor: 1e-4,
        }
    }
}

/// Estimates hole weights without computing permanents.
///
/// Starts from the complete bipartite graph with unit activities, where every
/// hole weight is exactly the part size. Each stage moves the activities
/// geometrically toward the target (`λ_e^{s/S}` on edges, `floor^{s/S}` on
/// non-edges, then the true graph), runs the chain with the current weights,
/// and corrects every hole weight by the observed ratio of perfect-class to
/// hole-class occupation. Pairs without a near-perfect matching in the final
/// graph are omitted.
pub fn anneal_hole_weights<R: Rng + ?Sized>(
    bg: &BipartiteGraph,
    schedule: &AnnealSchedule,
    rng: &mut R,
) -> Result<HoleWeights> {
    let part = bg.part_size()?;
    if schedule.stages == 0 {
        return Err(Error::InvalidInput(
            "anneal needs at least one stage".into(),
        ));
    }
    if !(schedule.floor > 0.0 && schedule.floor < 1.0) {
        return Err(Error::InvalidInput(alloc::format!(
            "anneal floor must lie in (0, 1), got {}",
            schedule.floor
        )));
    }
    let target = bg.graph();
    if bg.find_perfect_matching().is_none() {
        return Err(Error::NoPerfectMatching);
    }
    let lambda_max = target.max_weight_or_one();
    let lambda_min = target
        .edges()
        .iter()
        .map(|e| e.weight)
        .fold(1.0, f64::min)
        .min(schedule.floor);
    let spread = lambda_max / lambda_min;
    let p4 = libm::pow(part.max(2) as f64, 4.0);
    let (lower, upper) = (1.0 / (p4 * spread), p4 * spread * part as f64);

    let mut weights = alloc::vec![part as f64; part * part];
    let left = bg.left();
    let right = bg.right();
    let position: Vec<usize> = (0..target.vertex_count()).map(|v| bg.position(v)).collect();

    for stage in 1..=schedule.stages {
        let last = stage == schedule.stages;
        let t = stage as f64 / schedule.stages as f64;
        let mut g = Graph::new(target.vertex_count());
        for &u in left {
            for &v in right {
                let activity = match target.edge_between(u, v) {
                    Some(id) => libm::pow(target.edge(id).weight, t),
                    None if last => continue,
                    None => libm::pow(schedule.floor, t),
                };
                g.add_edge(u, v, activity)?;
            }
        }
        let stage_bg = BipartiteGraph::from_sides(&g, bg.sides().to_vec())?;
        let mut hw = HoleWeights::empty(&stage_bg, WeightMode::Annealed)?;
        hw.w.copy_from_slice(&weights);
        if last {
            for &u in left {
                for &v in right {
                    if !stage_bg.has_near_perfect_with_holes(u, v) {
                        hw.set(u, v, 0.0);
                    }
                }
            }
        }
        let start = stage_bg
            .find_perfect_matching()
            .ok_or(Error::NoPerfectMatching)?;
        let mut walk = PmWalk::new(&stage_bg, &hw, &start)?;
        let classes = hw.supported_pairs() as u64 + 1;
        let mut occupancy = alloc::vec![0.0; part * part + 1];
        // Steps per recorded move are about 2|E| / (moves available per state).
        let steps_per_move = (2 * g.edge_count()) as u64 / part.max(1) as u64 + 1;
        let budget = schedule.moves_per_class * classes * steps_per_move;
        walk.advance(budget / 10, rng);
        walk.advance_recording(budget, rng, &position, part, &mut occupancy);

        let perfect = occupancy[part * part];
        for i in 0..part * part {
            let current = hw.w[i];
            if current <= 0.0 {
                weights[i] = 0.0;
                continue;
            }
            let seen = occupancy[i];
            if seen > 0.0 && perfect > 0.0 {
                weights[i] = current * perfect / seen;
            }
            if !(weights[i] >= lower && weights[i] <= upper) {
                return Err(Error::AnnealDiverged {
                    stage,
                    value: weights[i],
                    lower,
                    upper,
                });
            }
        }
    }
    let mut hw = HoleWeights::empty(bg, WeightMode::Annealed)?;
    hw.w.copy_from_slice(&weights);
    Ok(hw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::oracle::{exact_pm_distribution, DistributionTable};
    use crate::seed::rng_from_seed;
    use alloc::vec;

    fn k22(weights: [[f64; 2]; 2]) -> BipartiteGraph {
        let rows: Vec<Vec<f64>> = weights.iter().map(|r| r.to_vec()).collect();
        BipartiteGraph::from_biadjacency(&Matrix::from_rows(&rows).unwrap()).unwrap()
    }

    #[test]
    fn exact_weights_on_small_graphs() {
        let one =
            BipartiteGraph::from_biadjacency(&Matrix::from_rows(&[vec![1.0]]).unwrap()).unwrap();
        let hw = compute_hole_weights_exact(&one).unwrap();
        assert_eq!(hw.get(0, 1), Some(1.0));

        let hw = compute_hole_weights_exact(&k22([[1.0, 1.0], [1.0, 1.0]])).unwrap();
        assert_eq!(hw.supported_pairs(), 4);
        assert!(hw.iter_positions().all(|(_, _, w)| w == 2.0));

        let id = BipartiteGraph::from_biadjacency(&Matrix::identity(2)).unwrap();
        let hw = compute_hole_weights_exact(&id).unwrap();
        assert_eq!(hw.get(0, 2), Some(1.0));
        assert_eq!(hw.get(0, 3), None);

        let none = BipartiteGraph::from_biadjacency(
            &Matrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 0.0]]).unwrap(),
        )
        .unwrap();
        assert_eq!(
            compute_hole_weights_exact(&none),
            Err(Error::NoPerfectMatching)
        );
    }

    #[test]
    fn removal_and_addition_acceptance() {
        let bg = k22([[2.0, 1.0], [1.0, 2.0]]);
        let hw = compute_hole_weights_exact(&bg).unwrap();
        // Perm = 5; minors are the opposite diagonal entry.
        assert_eq!(hw.get(0, 2), Some(2.5));
        assert_eq!(hw.get(0, 3), Some(5.0));
        let pm = Matching::from_pairs(bg.graph(), &[(0, 2), (1, 3)]).unwrap();
        let walk = PmWalk::new(&bg, &hw, &pm).unwrap();
        let id = bg.graph().edge_between(0, 2).unwrap();
        assert_eq!(walk.propose(id), (PmMove::Remove(id), 1.0));
        let npm = Matching::from_pairs(bg.graph(), &[(1, 3)]).unwrap();
        let walk = PmWalk::new(&bg, &hw, &npm).unwrap();
        assert_eq!(walk.holes(), Some((0, 2)));
        assert_eq!(walk.propose(id), (PmMove::Add(id), 2.0 / 2.5));
    }

    #[test]
    fn unique_perfect_matching_is_returned() {
        let path = Graph::unweighted(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let bg = BipartiteGraph::from_graph(&path).unwrap();
        let hw = compute_hole_weights_exact(&bg).unwrap();
        let cfg = ChainConfig::with_seed(5);
        let mut rng = rng_from_seed(5);
        let mut sampler = PmSampler::new(&bg, &hw, 0.1, &cfg, None).unwrap();
        let expect = Matching::from_pairs(bg.graph(), &[(0, 1), (2, 3)]).unwrap();
        for _ in 0..50 {
            assert_eq!(sampler.sample(&mut rng).unwrap(), expect);
        }
    }

    #[test]
    fn weighted_k22_frequencies() {
        let bg = k22([[2.0, 1.0], [1.0, 2.0]]);
        let hw = compute_hole_weights_exact(&bg).unwrap();
        let exact = exact_pm_distribution(bg.graph()).unwrap();
        let cfg = ChainConfig::with_seed(8);
        let mut rng = rng_from_seed(8);
        let mut sampler = PmSampler::new(&bg, &hw, 0.05, &cfg, None).unwrap();
        let n = 20_000;
        let draws = (0..n).map(|_| sampler.sample(&mut rng).unwrap().edges().to_vec());
        let emp = DistributionTable::from_samples(draws).unwrap();
        let diag = Matching::from_pairs(bg.graph(), &[(0, 2), (1, 3)]).unwrap();
        assert!((exact.probability(diag.edges()) - 0.8).abs() < 1e-12);
        let sigma = libm::sqrt(0.8 * 0.2 / n as f64);
        assert!((emp.probability(diag.edges()) - 0.8).abs() < 4.0 * sigma);
    }

    #[test]
    fn tiny_retry_budget_is_reported() {
        let bg = k22([[1.0, 1.0], [1.0, 1.0]]);
        let mut hw = compute_hole_weights_exact(&bg).unwrap();
        // Huge hole weights pin the chain in near-perfect states.
        for u in [0, 1] {
            for v in [2, 3] {
                hw.set(u, v, 1e12);
            }
        }
        let cfg = ChainConfig {
            max_steps_override: Some(50),
            ..ChainConfig::with_seed(1)
        };
        let mut sampler = PmSampler::new(&bg, &hw, 0.1, &cfg, Some(3)).unwrap();
        let mut rng = rng_from_seed(1);
        assert_eq!(
            sampler.sample(&mut rng),
            Err(Error::RetryBudgetExceeded { attempts: 3 })
        );
    }

    #[test]
    fn annealing_tracks_exact_weights() {
        let mut rng = rng_from_seed(21);
        let schedule = AnnealSchedule::default();
        let bg = k22([[1.0, 1.0], [1.0, 1.0]]);
        let annealed = anneal_hole_weights(&bg, &schedule, &mut rng).unwrap();
        let exact = compute_hole_weights_exact(&bg).unwrap();
        assert!(annealed.max_ratio(&exact) <= 2.0);

        let id = BipartiteGraph::from_biadjacency(&Matrix::identity(3)).unwrap();
        let annealed = anneal_hole_weights(&id, &schedule, &mut rng).unwrap();
        let exact = compute_hole_weights_exact(&id).unwrap();
        assert_eq!(annealed.supported_pairs(), exact.supported_pairs());
        assert!(annealed.max_ratio(&exact) <= 2.0);
    }
}
