use std::path::{Path, PathBuf};

use clap::ValueEnum;

use gbsamp_core::cartesian_product_k2;
use gbsamp_core::matching_chain::ChainConfig;
use gbsamp_core::pm_chain::compute_hole_weights_exact;
use gbsamp_core::seed::{derive_seed, rng_from_seed};
use gbsamp_core::verify::{self as v, CorpusGraph, CorpusMatrix, VerificationReport};

use super::parallel;
use crate::error::{CliError, CliResult};
use crate::formats::{emit_report_line, read_graph, read_matrix};
use crate::manifest::{emit, RunManifest};
use crate::{VerifyArgs, VerifyCheck};

const C_VALUES: [f64; 3] = [0.5, 1.0, 2.0];
const GADGET_EPSILONS: [f64; 2] = [0.1, 0.5];
const GBS_EPSILON: f64 = 0.05;
const BS_EPSILON: f64 = 0.2;
/// Transition matrices are built for graphs with at most this many edges.
const CHAIN_MAX_EDGES: usize = 6;
const PERMANENT_TRIALS: usize = 200;
const PERMANENT_MAX_N: usize = 8;
const HAFNIAN_MAX_VERTICES: usize = 10;

/// Corpora and settings for one `verify` run.
#[derive(Debug, Clone)]
pub struct VerifyPlan {
    pub check: VerifyCheck,
    pub graphs: Vec<CorpusGraph>,
    pub matrices: Vec<CorpusMatrix>,
    pub bs_matrices: Vec<CorpusMatrix>,
    pub samples: u64,
    pub seed: u64,
    pub epsilon: Option<f64>,
    pub step_constant: f64,
}

fn sorted_files(dir: &Path, exts: &[&str]) -> CliResult<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| exts.iter().any(|x| e == *x)))
        .collect();
    files.sort();
    Ok(files)
}

fn stem(p: &Path) -> String {
    p.file_stem()
        .unwrap_or_default()
        .to_string_lossy()
        .into_owned()
}

impl VerifyPlan {
    pub fn from_args(a: &VerifyArgs) -> CliResult<Self> {
        if a.samples < 1 {
            return Err(CliError::Validation("samples must be ≥ 1".into()));
        }
        let mut graphs = v::connected_graphs(a.corpus_max_n)?;
        let mut matrices = v::matrix_corpus();
        let mut bs_matrices = v::bs_sampling_matrices();
        if let Some(dir) = &a.corpus_dir {
            let gdir = dir.join("graphs");
            if gdir.is_dir() {
                graphs = sorted_files(&gdir, &["json"])?
                    .iter()
                    .map(|p| {
                        Ok(CorpusGraph {
                            id: stem(p),
                            graph: read_graph(p)?,
                        })
                    })
                    .collect::<CliResult<_>>()?;
            }
            let mdir = dir.join("matrices");
            if mdir.is_dir() {
                matrices = sorted_files(&mdir, &["csv", "json"])?
                    .iter()
                    .map(|p| {
                        Ok(CorpusMatrix {
                            id: stem(p),
                            matrix: read_matrix(p)?,
                        })
                    })
                    .collect::<CliResult<_>>()?;
                bs_matrices = matrices.clone();
            }
        }
        Ok(Self {
            check: a.check,
            graphs,
            matrices,
            bs_matrices,
            samples: a.samples,
            seed: a.seed,
            epsilon: a.epsilon,
            step_constant: a.step_constant,
        })
    }

    fn chain(&self, index: u64) -> ChainConfig {
        ChainConfig {
            step_constant: self.step_constant,
            ..ChainConfig::with_seed(derive_seed(self.seed, index))
        }
    }
}

type Job<'a> = Box<dyn Fn() -> CliResult<Vec<VerificationReport>> + Send + Sync + 'a>;

fn one(r: gbsamp_core::Result<VerificationReport>) -> CliResult<Vec<VerificationReport>> {
    Ok(vec![r?])
}

fn jobs(plan: &VerifyPlan) -> Vec<Job<'_>> {
    use VerifyCheck::*;
    let want = |c: VerifyCheck| plan.check == All || plan.check == c;
    let mut jobs: Vec<Job<'_>> = Vec::new();
    for (idx, item) in plan.graphs.iter().enumerate() {
        let (id, g) = (item.id.as_str(), &item.graph);
        if plan.check == All {
            jobs.push(Box::new(move || {
                let mut out = Vec::new();
                for c in C_VALUES {
                    out.push(v::check_lemma1(id, g, c)?);
                    out.push(v::check_boosted_acceptance(id, g, c)?);
                }
                Ok(out)
            }));
            jobs.push(Box::new(move || {
                one(v::check_acceptance_probe(
                    id,
                    g,
                    1.0,
                    plan.samples,
                    &plan.chain(2 * idx as u64 + 1),
                ))
            }));
            if g.edge_count() <= CHAIN_MAX_EDGES {
                jobs.push(Box::new(move || Ok(v::check_matching_chain(id, g)?)));
            }
            jobs.push(Box::new(move || {
                let mut out = Vec::new();
                if g.vertex_count() <= HAFNIAN_MAX_VERTICES {
                    out.push(v::check_hafnian_oracle(id, g)?);
                }
                for c in C_VALUES {
                    let pg = cartesian_product_k2(g, c)?;
                    if pg.graph().vertex_count() <= HAFNIAN_MAX_VERTICES {
                        out.push(v::check_hafnian_oracle(
                            &format!("{id}-product-c{c}"),
                            pg.graph(),
                        )?);
                    }
                }
                Ok(out)
            }));
        }
        if want(Lemma2) {
            jobs.push(Box::new(move || {
                C_VALUES
                    .iter()
                    .map(|&c| Ok(v::check_lemma2(id, g, c)?))
                    .collect()
            }));
        }
        if want(Logconcavity) {
            jobs.push(Box::new(move || {
                let mut out = vec![v::check_log_concavity(id, g)?];
                for c in C_VALUES {
                    let pg = cartesian_product_k2(g, c)?;
                    out.push(v::check_log_concavity(
                        &format!("{id}-product-c{c}"),
                        pg.graph(),
                    )?);
                }
                Ok(out)
            }));
        }
        if want(TvGbs) {
            let eps = plan.epsilon.unwrap_or(GBS_EPSILON);
            jobs.push(Box::new(move || {
                one(v::check_gbs_sampler(
                    id,
                    g,
                    1.0,
                    eps,
                    plan.samples,
                    &plan.chain(2 * idx as u64),
                ))
            }));
        }
    }
    if plan.check == All {
        jobs.push(Box::new(|| {
            let mut out = Vec::new();
            for (id, bg) in v::pm_chain_corpus()? {
                let hw = compute_hole_weights_exact(&bg)?;
                out.extend(v::check_pm_chain(&id, &bg, &hw)?);
            }
            Ok(out)
        }));
        jobs.push(Box::new(|| {
            let mut rng = rng_from_seed(derive_seed(plan.seed, u64::MAX));
            Ok(vec![v::check_permanent_oracles(
                PERMANENT_TRIALS,
                PERMANENT_MAX_N,
                &mut rng,
            )])
        }));
    }
    if want(GadgetBias) {
        for item in &plan.matrices {
            jobs.push(Box::new(move || {
                let eps: Vec<f64> = plan.epsilon.map_or(GADGET_EPSILONS.to_vec(), |e| vec![e]);
                let mut out = Vec::new();
                for e in eps {
                    out.extend(v::check_gadget_closeness(&item.id, &item.matrix, e)?);
                }
                Ok(out)
            }));
        }
    }
    if want(TvBs) {
        let eps = plan.epsilon.unwrap_or(BS_EPSILON);
        for (idx, item) in plan.bs_matrices.iter().enumerate() {
            jobs.push(Box::new(move || {
                one(v::check_bs_sampler(
                    &item.id,
                    &item.matrix,
                    eps,
                    plan.samples,
                    &plan.chain(1 << 32 | idx as u64),
                ))
            }));
        }
    }
    jobs
}

/// Every report of `plan`, in a fixed order independent of `workers`.
pub fn verify_reports(plan: &VerifyPlan, workers: usize) -> CliResult<Vec<VerificationReport>> {
    let jobs = jobs(plan);
    let results = parallel(jobs.len(), workers, |i| jobs[i]());
    let mut out = Vec::new();
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

pub fn verify(a: &VerifyArgs) -> CliResult<()> {
    let plan = VerifyPlan::from_args(a)?;
    let reports = verify_reports(&plan, a.workers)?;
    let mut text = String::new();
    for r in &reports {
        emit_report_line(r, &mut text);
    }
    let name = a.check.to_possible_value().expect("no skipped variants");
    let mut m = RunManifest::new(format!("verify {}", name.get_name()), a.seed);
    m.set("corpus_max_n", a.corpus_max_n)
        .set("samples", a.samples)
        .set("step_constant", a.step_constant)
        .set(
            "epsilon",
            a.epsilon.map_or("default".into(), |e| e.to_string()),
        )
        .set("workers", a.workers);
    if let Some(dir) = &a.corpus_dir {
        m.set("corpus_dir", dir.display());
    }
    emit(a.out.as_deref(), &text, &m)?;
    let failed = reports.iter().filter(|r| !r.passed).count();
    for r in reports.iter().filter(|r| !r.passed) {
        eprintln!(
            "FAILED {} on {}: observed {} against bound {}",
            r.check_name, r.corpus_item, r.observed, r.claimed_bound
        );
    }
    if failed > 0 {
        return Err(CliError::ChecksFailed {
            failed,
            total: reports.len(),
        });
    }
    Ok(())
}
