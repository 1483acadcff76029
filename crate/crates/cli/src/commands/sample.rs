use gbsamp_core::bs::{BsRequest, BsSampler};
use gbsamp_core::gbs::{GbsRequest, GbsSampler};
use gbsamp_core::pm_chain::{AnnealSchedule, WeightMode};
use gbsamp_core::seed::replica_rng;

use super::{chain_config, check_run, parallel, record_chain, split};
use crate::error::{CliError, CliResult};
use crate::formats::{emit_sample_line, read_graph, read_matrix};
use crate::manifest::{emit, write_atomic, RunManifest};
use crate::{PmWeightMode, SampleBsArgs, SampleGbsArgs};

pub fn sample_gbs(a: &SampleGbsArgs) -> CliResult<()> {
    check_run(&a.run)?;
    let cfg = chain_config(&a.chain)?;
    let g = read_graph(&a.graph)?;
    let base = GbsSampler::new(&GbsRequest::new(g, a.c, a.chain.epsilon, cfg))?;
    let counts = split(a.run.samples, a.run.workers);
    let results = parallel(counts.len(), a.run.workers, |i| {
        let mut sampler = base.clone();
        let mut rng = replica_rng(a.chain.seed, i as u64);
        let mut text = String::new();
        sampler
            .for_each_sample(counts[i] as usize, &mut rng, |s| {
                emit_sample_line(s, &mut text)
            })
            .map(|_| {
                let st = sampler.stats();
                let diag = serde_json::json!({
                    "replica": i,
                    "samples": st.samples,
                    "checkpoints": st.draws,
                    "acceptance_rate": st.acceptance_rate(),
                    "burn_in_steps": sampler.steps(),
                    "spacing": sampler.spacing(),
                });
                (text, diag)
            })
    });
    let mut m = RunManifest::new("sample-gbs", a.chain.seed);
    m.input(&a.graph)?.set("c", a.c);
    record_chain(&mut m, &a.chain, &a.run);
    finish(
        results,
        a.run.out.as_deref(),
        a.run.diagnostics.as_deref(),
        &m,
    )
}

pub fn sample_bs(a: &SampleBsArgs) -> CliResult<()> {
    check_run(&a.run)?;
    let cfg = chain_config(&a.chain)?;
    let matrix = read_matrix(&a.matrix)?;
    let mut anneal = AnnealSchedule::default();
    if let Some(stages) = a.anneal_stages {
        anneal.stages = stages;
    }
    let req = BsRequest {
        k_override: a.k,
        weight_mode: match a.pm_weight_mode {
            PmWeightMode::Oracle => WeightMode::OracleExact,
            PmWeightMode::Anneal => WeightMode::Annealed,
        },
        anneal,
        retry_budget: a.retry_budget,
        ..BsRequest::new(matrix, a.chain.epsilon, cfg)
    };
    let base = BsSampler::new(&req)?;
    let counts = split(a.run.samples, a.run.workers);
    let results = parallel(counts.len(), a.run.workers, |i| {
        let mut sampler = base.clone();
        let mut rng = replica_rng(a.chain.seed, i as u64);
        let mut text = String::new();
        if counts[i] == 0 {
            return Ok::<_, gbsamp_core::Error>((
                text,
                serde_json::json!({"replica": i, "samples": 0}),
            ));
        }
        let draws = sampler.sample_many(counts[i] as usize, &mut rng)?;
        for z in &draws {
            emit_sample_line(z.as_slice(), &mut text);
        }
        let st = sampler.stats();
        let diag = serde_json::json!({
            "replica": i,
            "samples": st.samples,
            "checkpoints": st.checkpoints,
            "steps": st.steps,
            "acceptance_rate": st.samples as f64 / st.checkpoints.max(1) as f64,
            "burn_in_steps": sampler.steps(),
            "k": sampler.gadget().k(),
        });
        Ok((text, diag))
    });
    let mut m = RunManifest::new("sample-bs", a.chain.seed);
    m.input(&a.matrix)?
        .set("k", base.gadget().k())
        .set(
            "pm_weight_mode",
            format!("{:?}", a.pm_weight_mode).to_lowercase(),
        )
        .set("anneal_stages", anneal.stages)
        .set("retry_budget", base.retry_budget());
    record_chain(&mut m, &a.chain, &a.run);
    finish(
        results,
        a.run.out.as_deref(),
        a.run.diagnostics.as_deref(),
        &m,
    )
}

fn finish<E: Into<CliError>>(
    results: Vec<Result<(String, serde_json::Value), E>>,
    out: Option<&std::path::Path>,
    diagnostics: Option<&std::path::Path>,
    manifest: &RunManifest,
) -> CliResult<()> {
    let mut text = String::new();
    let mut diag = String::new();
    for r in results {
        let (t, d) = r.map_err(Into::into)?;
        text.push_str(&t);
        diag.push_str(&d.to_string());
        diag.push('\n');
    }
    if let Some(path) = diagnostics {
        write_atomic(path, diag.as_bytes())?;
    }
    emit(out, &text, manifest)
}
