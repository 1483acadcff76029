//! Sampling occupancy vectors with probability proportional to
//! `Perm(A_z)² / Π z_i!` for a non-negative matrix: build the `k`-copy
//! gadget, sample a perfect matching, and read off the occupancy.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::gadget::{
    bs_gadget, occupancy_count, occupancy_of_edges, occupancy_vectors, BipartiteGadget,
    OccupancyVector,
};
use crate::matching_chain::{check_epsilon, required_steps, ChainConfig};
use crate::matrix::Matrix;
use crate::oracle::permanent::permanent;
use crate::oracle::targets::{bias_factor, OCCUPANCY_MAX};
use crate::pm_chain::{
    anneal_hole_weights, compute_hole_weights_exact, default_retry_budget, AnnealSchedule,
    HoleWeights, PmSampler, PmStats, WeightMode, EXACT_HOLE_WEIGHT_MAX_PART,
};
use crate::seed::{derive_seed, rng_from_seed};

/// `k = ⌈4n²/ε⌉`.
pub fn choose_k(n: usize, epsilon: f64) -> Result<usize> {
    check_epsilon(epsilon)?;
    Ok(libm::ceil(4.0 * (n * n) as f64 / epsilon) as usize)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BsRequest {
    pub matrix: Matrix,
    pub epsilon: f64,
    pub chain: ChainConfig,
    pub k_override: Option<usize>,
    pub weight_mode: WeightMode,
    pub anneal: AnnealSchedule,
    pub retry_budget: Option<u64>,
}

impl BsRequest {
    pub fn new(matrix: Matrix, epsilon: f64, chain: ChainConfig) -> Self {
        Self {
            matrix,
            epsilon,
            chain,
            k_override: None,
            weight_mode: WeightMode::OracleExact,
            anneal: AnnealSchedule::default(),
            retry_budget: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let a = &self.matrix;
        if a.rows() == 0 || a.cols() == 0 {
            return Err(Error::Dimension(
                "matrix must have at least one row and column".into(),
            ));
        }
        a.check_non_negative()?;
        check_epsilon(self.epsilon)?;
        self.chain.validate()?;
        if self.k_override == Some(0) {
            return Err(Error::InvalidInput("k must be positive".into()));
        }
        if (0..a.cols()).any(|i| (0..a.rows()).all(|j| a.get(j, i) == 0.0)) {
            return Err(Error::ZeroNormalizer);
        }
        Ok(())
    }

    /// Copies per row: the override if set, else `⌈4n²/ε⌉`.
    pub fn k(&self) -> Result<usize> {
        match self.k_override {
            Some(k) => Ok(k),
            None => choose_k(self.matrix.cols(), self.epsilon),
        }
    }
}

/// Exact hole weights of a gadget from its row-multiplicity structure.
///
/// A perfect matching picks a set `S` of `n` first-layer row copies matched
/// to the column vertices, and their twins matched to the second-layer
/// column vertices; every other copy uses its rung. Summing over the copies
/// with a given occupancy `z` gives `Π C(k, z_r)·Perm(A_z)²`. Removing two
/// hole vertices changes which copies are available and which columns must
/// be covered, giving one sum per kind of hole pair; each sum depends only on
/// the columns and rows involved, so `m·k` copies cost nothing extra.
pub fn gadget_hole_weights(gadget: &BipartiteGadget) -> Result<HoleWeights> {
    let a = gadget.matrix();
    let (m, n, k) = (a.rows(), a.cols(), gadget.k());
    if occupancy_count(m, n) > OCCUPANCY_MAX {
        return Err(Error::SizeLimit {
            what: "number of occupancy vectors",
            size: occupancy_count(m, n),
            limit: OCCUPANCY_MAX,
        });
    }
    let binom = |kk: isize, z: usize| -> f64 {
        if kk < z as isize {
            return 0.0;
        }
        (0..z)
            .map(|j| (kk - j as isize) as f64 / (j + 1) as f64)
            .product()
    };
    let weight = |z: &[usize], minus: &[usize]| -> f64 {
        z.iter()
            .enumerate()
            .map(|(r, &zr)| binom(k as isize - minus[r] as isize, zr))
            .product()
    };

    let mut full: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for z in occupancy_vectors(m, n) {
        let p = permanent(&a.repeat_rows(&z))?;
        full.insert(z, p);
    }
    let zero = alloc::vec![0usize; m];
    let perm_b: f64 = full.iter().map(|(z, p)| weight(z, &zero) * p * p).sum();
    if perm_b <= 0.0 {
        return Err(Error::NoPerfectMatching);
    }

    // Perm of A_{z'} with column i deleted, for z' with n − 1 entries.
    let partial = occupancy_vectors(m, n - 1);
    let cols: Vec<usize> = (0..n).collect();
    let mut minus_col: Vec<Vec<f64>> = Vec::with_capacity(partial.len());
    for z in &partial {
        let rows = a.repeat_rows(z);
        let all_rows: Vec<usize> = (0..n - 1).collect();
        let mut per_col = Vec::with_capacity(n);
        for i in 0..n {
            let keep: Vec<usize> = cols.iter().copied().filter(|&c| c != i).collect();
            per_col.push(permanent(&rows.select(&all_rows, &keep))?);
        }
        minus_col.push(per_col);
    }
    let plus = |z: &[usize], j: usize| -> f64 {
        let mut y = z.to_vec();
        y[j] += 1;
        full[&y]
    };
    let unit = |j: usize, j2: Option<usize>| -> Vec<usize> {
        let mut v = alloc::vec![0usize; m];
        v[j] += 1;
        if let Some(j2) = j2 {
            v[j2] += 1;
        }
        v
    };

    let mut cols_cols = alloc::vec![0.0; n * n];
    let mut col_row = alloc::vec![0.0; n * m];
    let mut row_row = alloc::vec![0.0; m * m];
    for (idx, z) in partial.iter().enumerate() {
        let plain = weight(z, &zero);
        for i in 0..n {
            for i2 in 0..n {
                cols_cols[i * n + i2] += plain * minus_col[idx][i] * minus_col[idx][i2];
            }
        }
        for j in 0..m {
            let wj = weight(z, &unit(j, None));
            let pj = plus(z, j);
            for i in 0..n {
                col_row[i * m + j] += wj * minus_col[idx][i] * pj;
            }
            for j2 in 0..m {
                row_row[j * m + j2] += weight(z, &unit(j, Some(j2))) * pj * plus(z, j2);
            }
        }
    }
    let mut twin = alloc::vec![0.0; m];
    for (z, p) in &full {
        for (j, t) in twin.iter_mut().enumerate() {
            *t += weight(z, &unit(j, None)) * p * p;
        }
    }

    let bg = gadget.bipartite();
    let mut hw = HoleWeights::empty(bg, WeightMode::OracleExact)?;
    let mut put = |u: usize, v: usize, sum: f64| {
        if sum > 0.0 {
            hw.set(u, v, perm_b / sum);
        }
    };
    for i in 0..n {
        let l1 = gadget.column_vertex(i, 1);
        for i2 in 0..n {
            put(l1, gadget.column_vertex(i2, 2), cols_cols[i * n + i2]);
        }
        for j in 0..m {
            for t in 0..k {
                put(l1, gadget.row_vertex(j, t, 1), col_row[i * m + j]);
                put(
                    gadget.row_vertex(j, t, 2),
                    gadget.column_vertex(i, 2),
                    col_row[i * m + j],
                );
            }
        }
    }
    for j in 0..m {
        for t in 0..k {
            let x = gadget.row_vertex(j, t, 2);
            for j2 in 0..m {
                for t2 in 0..k {
                    let y = gadget.row_vertex(j2, t2, 1);
                    if (j, t) == (j2, t2) {
                        put(x, y, twin[j]);
                    } else {
                        put(x, y, row_row[j * m + j2]);
                    }
                }
            }
        }
    }
    Ok(hw)
}

/// Hole weights for the gadget in the requested mode. Oracle mode uses
/// explicit minor permanents for small gadgets and the structured sums above
/// otherwise.
pub fn gadget_weights_for(
    gadget: &BipartiteGadget,
    mode: WeightMode,
    schedule: &AnnealSchedule,
    seed: u64,
) -> Result<HoleWeights> {
    match mode {
        WeightMode::OracleExact => {
            if gadget.bipartite().part_size()? <= EXACT_HOLE_WEIGHT_MAX_PART {
                compute_hole_weights_exact(gadget.bipartite())
            } else {
                gadget_hole_weights(gadget)
            }
        }
        WeightMode::Annealed => {
            let mut rng = rng_from_seed(derive_seed(seed, u64::MAX));
            anneal_hole_weights(gadget.bipartite(), schedule, &mut rng)
        }
    }
}

/// Reusable pipeline state for one request.
#[derive(Debug, Clone)]
pub struct BsSampler {
    gadget: BipartiteGadget,
    weights: HoleWeights,
    start: crate::graph::Matching,
    steps: u64,
    retry_budget: u64,
    stats: PmStats,
}

impl BsSampler {
    pub fn new(req: &BsRequest) -> Result<Self> {
        req.validate()?;
        let gadget = bs_gadget(&req.matrix, req.k()?)?;
        let start = gadget
            .bipartite()
            .find_perfect_matching()
            .ok_or(Error::ZeroNormalizer)?;
        let weights = gadget_weights_for(&gadget, req.weight_mode, &req.anneal, req.chain.seed)?;
        let eps = req.epsilon / 2.0;
        let steps = required_steps(gadget.graph(), eps, &req.chain);
        let retry_budget = req
            .retry_budget
            .unwrap_or_else(|| default_retry_budget(eps, &weights));
        Ok(Self {
            gadget,
            weights,
            start,
            steps,
            retry_budget,
            stats: PmStats::default(),
        })
    }

    pub fn gadget(&self) -> &BipartiteGadget {
        &self.gadget
    }

    pub fn weights(&self) -> &HoleWeights {
        &self.weights
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn retry_budget(&self) -> u64 {
        self.retry_budget
    }

    pub fn stats(&self) -> PmStats {
        self.stats
    }

    pub fn sample_many<R: Rng + ?Sized>(
        &mut self,
        count: usize,
        rng: &mut R,
    ) -> Result<Vec<OccupancyVector>> {
        let mut pm = PmSampler::from_parts(
            self.gadget.bipartite(),
            &self.weights,
            &self.start,
            self.steps,
            self.retry_budget,
        )?;
        let gadget = &self.gadget;
        let mut out = Vec::with_capacity(count);
        let mut result = Ok(());
        for _ in 0..count {
            match pm.draw_with(rng, |walk| occupancy_of_edges(gadget, walk.matched_edges())) {
                Ok(z) => out.push(z),
                Err(e) => {
                    result = Err(e);
                    break;
                }
            }
        }
        let s = pm.stats();
        self.stats.samples += s.samples;
        self.stats.checkpoints += s.checkpoints;
        self.stats.steps += s.steps;
        result.map(|_| out)
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<OccupancyVector> {
        Ok(self.sample_many(1, rng)?.remove(0))
    }
}

/// One occupancy vector drawn with the stream seeded by `req.chain.seed`.
pub fn sample_bs(req: &BsRequest) -> Result<OccupancyVector> {
    let mut rng = rng_from_seed(req.chain.seed);
    BsSampler::new(req)?.sample(&mut rng)
}

/// Per-outcome ratio between gadget and boson-sampling weights.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasReport {
    pub k: usize,
    pub rows: Vec<(Vec<usize>, f64)>,
    pub min_factor: f64,
    /// `e^{−2n²/k}`, below which no factor can fall.
    pub lower_bound: f64,
}

impl BiasReport {
    /// Whether every factor lies in `[e^{−ε/2}, 1]`.
    pub fn within(&self, epsilon: f64) -> bool {
        let floor = libm::exp(-epsilon / 2.0);
        self.rows.iter().all(|&(_, f)| f <= 1.0 && f >= floor)
    }
}

/// `Π_i Π_{j<z_i} (1 − j/k)` for every `z ∈ Φ_{m,n}`.
pub fn gadget_bias_report(a: &Matrix, k: usize) -> Result<BiasReport> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be positive".into()));
    }
    let (m, n) = (a.rows(), a.cols());
    let count = occupancy_count(m, n);
    if count > OCCUPANCY_MAX {
        return Err(Error::SizeLimit {
            what: "number of occupancy vectors",
            size: count,
            limit: OCCUPANCY_MAX,
        });
    }
    let rows: Vec<(Vec<usize>, f64)> = occupancy_vectors(m, n)
        .into_iter()
        .map(|z| {
            let f = bias_factor(&z, k);
            (z, f)
        })
        .collect();
    let min_factor = rows.iter().map(|r| r.1).fold(1.0, f64::min);
    Ok(BiasReport {
        k,
        rows,
        min_factor,
        lower_bound: libm::exp(-2.0 * (n * n) as f64 / k as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{exact_bs_distribution, tv_distance, DistributionTable};
    use crate::seed::rng_from_seed;
    use alloc::vec;

    #[test]
    fn k_choices() {
        assert_eq!(choose_k(2, 0.5).unwrap(), 32);
        assert_eq!(choose_k(1, 1.0 - 1e-9).unwrap(), 5);
        assert_eq!(choose_k(3, 0.1).unwrap(), 360);
        assert!(choose_k(3, 0.0).is_err());
    }

    #[test]
    fn structured_weights_match_minor_permanents() {
        let mats = [
            Matrix::from_fn(3, 2, |_, _| 1.0),
            Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 3.0]]).unwrap(),
            Matrix::from_rows(&[vec![2.0], vec![1.0]]).unwrap(),
            Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap(),
            Matrix::from_rows(&[vec![1.0, 1.0, 2.0], vec![0.0, 1.0, 1.0]]).unwrap(),
        ];
        for a in &mats {
            for k in 1..=3 {
                let Ok(g) = bs_gadget(a, k) else { continue };
                if g.bipartite().part_size().unwrap() > EXACT_HOLE_WEIGHT_MAX_PART {
                    continue;
                }
                let oracle = compute_hole_weights_exact(g.bipartite()).unwrap();
                let structured = gadget_hole_weights(&g).unwrap();
                assert_eq!(oracle.supported_pairs(), structured.supported_pairs());
                let r = oracle.max_ratio(&structured);
                assert!(r - 1.0 < 1e-12, "k={k} ratio {r}");
            }
        }
    }

    #[test]
    fn bias_examples() {
        let a = Matrix::from_fn(3, 2, |_, _| 1.0);
        let r = gadget_bias_report(&a, 32).unwrap();
        assert!(r
            .rows
            .iter()
            .any(|(z, f)| z == &vec![2, 0, 0] && *f == 31.0 / 32.0));
        assert!(r
            .rows
            .iter()
            .filter(|(z, _)| z.iter().all(|&x| x <= 1))
            .all(|(_, f)| *f == 1.0));
        assert!(r.min_factor >= libm::exp(-0.25));
        assert!(r.within(0.5));
    }

    #[test]
    fn single_entry_is_deterministic() {
        let req = BsRequest::new(
            Matrix::from_rows(&[vec![1.0]]).unwrap(),
            0.3,
            ChainConfig::with_seed(2),
        );
        assert_eq!(sample_bs(&req).unwrap(), OccupancyVector(vec![1]));
    }

    #[test]
    fn two_row_column_frequencies() {
        let a = Matrix::from_rows(&[vec![1.0], vec![2.0]]).unwrap();
        let req = BsRequest::new(
            a.clone(),
            0.1,
            ChainConfig {
                step_constant: 0.05,
                ..ChainConfig::with_seed(3)
            },
        );
        let mut s = BsSampler::new(&req).unwrap();
        let mut rng = rng_from_seed(3);
        let n = 10_000;
        let draws = s.sample_many(n, &mut rng).unwrap();
        let emp = DistributionTable::from_samples(draws.into_iter().map(|z| z.0)).unwrap();
        let exact = exact_bs_distribution(&a).unwrap();
        let allowance = 0.1 + 3.0 * libm::sqrt(2.0 / n as f64);
        assert!(tv_distance(&emp, &exact) <= allowance);
    }

    #[test]
    fn zero_column_rejected() {
        let a = Matrix::from_rows(&[vec![1.0, 0.0], vec![2.0, 0.0]]).unwrap();
        let req = BsRequest::new(a, 0.2, ChainConfig::default());
        assert_eq!(sample_bs(&req), Err(Error::ZeroNormalizer));
    }
}
