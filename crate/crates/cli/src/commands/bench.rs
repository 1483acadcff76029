use std::time::Instant;

use gbsamp_core::bs::{BsRequest, BsSampler};
use gbsamp_core::gbs::{GbsRequest, GbsSampler};
use gbsamp_core::matching_chain::ChainConfig;
use gbsamp_core::seed::{derive_seed, rng_from_seed};
use gbsamp_core::{Graph, Matrix};
use rand::Rng;

use crate::error::{CliError, CliResult};
use crate::manifest::{emit, RunManifest};
use crate::BenchCommand;

struct Row {
    n: usize,
    m: usize,
    seconds_per_sample: f64,
    chain_steps: u64,
    acceptance_rate: f64,
}

/// `G(n, 1/2)`, redrawn until connected.
fn random_connected_graph<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Graph {
    loop {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|_| rng.random_bool(0.5))
            .collect();
        let g = Graph::unweighted(n, pairs).expect("pairs are in range");
        if g.is_connected() {
            return g;
        }
    }
}

/// Least-squares slope of `ln y` against `ln x`.
fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn bench(cmd: &BenchCommand) -> CliResult<()> {
    let (kind, a, default_sizes, default_eps) = match cmd {
        BenchCommand::Gbs(a) => ("gbs", a, vec![4, 6, 8], 0.05),
        BenchCommand::Bs(a) => ("bs", a, vec![1, 2], 0.5),
    };
    if a.samples < 1 {
        return Err(CliError::Validation("samples must be ≥ 1".into()));
    }
    let sizes = a.sizes.clone().unwrap_or(default_sizes);
    let eps = a.epsilon.unwrap_or(default_eps);
    let mut rows = Vec::new();
    for (i, &n) in sizes.iter().enumerate() {
        let seed = derive_seed(a.seed, i as u64);
        let mut rng = rng_from_seed(seed);
        let chain = ChainConfig::with_seed(seed);
        let start = Instant::now();
        let row = if kind == "gbs" {
            let g = random_connected_graph(n, &mut rng);
            let mut s = GbsSampler::new(&GbsRequest::new(g.clone(), a.c, eps, chain))?;
            s.for_each_sample(a.samples as usize, &mut rng, |_| {})?;
            Row {
                n,
                m: g.edge_count(),
                seconds_per_sample: start.elapsed().as_secs_f64() / a.samples as f64,
                chain_steps: s.steps(),
                acceptance_rate: s.stats().acceptance_rate(),
            }
        } else {
            let a_mat = Matrix::from_fn(n, n, |_, _| f64::from(rng.random_range(1..=2u8)));
            let mut s = BsSampler::new(&BsRequest::new(a_mat, eps, chain))?;
            s.sample_many(a.samples as usize, &mut rng)?;
            let st = s.stats();
            Row {
                n,
                m: s.gadget().graph().edge_count(),
                seconds_per_sample: start.elapsed().as_secs_f64() / a.samples as f64,
                chain_steps: s.steps(),
                acceptance_rate: st.samples as f64 / st.checkpoints.max(1) as f64,
            }
        };
        rows.push(row);
    }
    let mut text = String::from("n,m,c,epsilon,seconds_per_sample,chain_steps,acceptance_rate\n");
    for r in &rows {
        text.push_str(&format!(
            "{},{},{},{},{:.6e},{},{:.4}\n",
            r.n, r.m, a.c, eps, r.seconds_per_sample, r.chain_steps, r.acceptance_rate
        ));
    }
    let points: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.n as f64, r.seconds_per_sample))
        .collect();
    match log_log_slope(&points) {
        Some(s) => text.push_str(&format!(
            "# log-log slope of seconds_per_sample vs n: {s:.3}\n"
        )),
        None => text.push_str("# log-log slope of seconds_per_sample vs n: undefined\n"),
    }
    let mut m = RunManifest::new(format!("bench {kind}"), a.seed);
    m.set("sizes", format!("{sizes:?}"))
        .set("samples", a.samples)
        .set("epsilon", eps)
        .set("c", a.c);
    emit(a.out.as_deref(), &text, &m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [2.0, 4.0, 8.0]
            .iter()
            .map(|&x: &f64| (x, 3.0 * x.powi(4)))
            .collect();
        assert!((log_log_slope(&pts).unwrap() - 4.0).abs() < 1e-12);
        assert!(log_log_slope(&pts[..1]).is_none());
    }

    #[test]
    fn random_graphs_are_connected() {
        let mut rng = rng_from_seed(1);
        for n in 1..8 {
            assert!(random_connected_graph(n, &mut rng).is_connected());
        }
    }
}
