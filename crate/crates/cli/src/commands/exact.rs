use gbsamp_core::bs::{choose_k, gadget_bias_report};
use gbsamp_core::bs_gadget;
use gbsamp_core::oracle::{
    exact_bs_distribution, exact_gadget_distribution, exact_gbs_distribution,
    exact_matching_distribution, exact_pm_distribution,
};

use crate::error::CliResult;
use crate::formats::{emit_table, read_graph, read_matrix};
use crate::manifest::{emit, RunManifest};
use crate::{BiasArgs, ExactCommand};

fn gadget_k(k: Option<usize>, cols: usize, epsilon: f64) -> CliResult<usize> {
    Ok(match k {
        Some(k) => k,
        None => choose_k(cols, epsilon)?,
    })
}

pub fn exact(cmd: &ExactCommand) -> CliResult<()> {
    match cmd {
        ExactCommand::Gbs { graph, c, out } => {
            let t = exact_gbs_distribution(&read_graph(graph)?, *c)?;
            let mut m = RunManifest::new("exact gbs", 0);
            m.input(graph)?.set("c", c);
            emit(out.as_deref(), &emit_table("gbs", &t), &m)
        }
        ExactCommand::Bs { matrix, out } => {
            let t = exact_bs_distribution(&read_matrix(matrix)?)?;
            let mut m = RunManifest::new("exact bs", 0);
            m.input(matrix)?;
            emit(out.as_deref(), &emit_table("bs", &t), &m)
        }
        ExactCommand::Gadget {
            matrix,
            k,
            epsilon,
            out,
        } => {
            let a = read_matrix(matrix)?;
            let k = gadget_k(*k, a.cols(), *epsilon)?;
            let t = exact_gadget_distribution(&bs_gadget(&a, k)?)?;
            let mut m = RunManifest::new("exact gadget", 0);
            m.input(matrix)?.set("k", k);
            emit(out.as_deref(), &emit_table("gadget", &t), &m)
        }
        ExactCommand::Matchings {
            graph,
            perfect,
            out,
        } => {
            let g = read_graph(graph)?;
            let (kind, t) = if *perfect {
                ("perfect-matchings", exact_pm_distribution(&g)?)
            } else {
                ("matchings", exact_matching_distribution(&g)?)
            };
            let mut m = RunManifest::new("exact matchings", 0);
            m.input(graph)?.set("perfect", perfect);
            emit(out.as_deref(), &emit_table(kind, &t), &m)
        }
    }
}

pub fn bias_report(a: &BiasArgs) -> CliResult<()> {
    let matrix = read_matrix(&a.matrix)?;
    let k = gadget_k(a.k, matrix.cols(), a.epsilon)?;
    let r = gadget_bias_report(&matrix, k)?;
    let rows: Vec<serde_json::Value> = r
        .rows
        .iter()
        .map(|(z, f)| serde_json::json!({"outcome": z, "factor": f}))
        .collect();
    let body = serde_json::json!({
        "k": r.k,
        "epsilon": a.epsilon,
        "min_factor": r.min_factor,
        "lower_bound": r.lower_bound,
        "within_epsilon": r.within(a.epsilon),
        "rows": rows,
    });
    let mut text = serde_json::to_string_pretty(&body).expect("report serializes");
    text.push('\n');
    let mut m = RunManifest::new("bias-report", 0);
    m.input(&a.matrix)?.set("k", k).set("epsilon", a.epsilon);
    emit(a.out.as_deref(), &text, &m)
}
