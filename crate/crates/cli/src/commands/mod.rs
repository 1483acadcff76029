mod bench;
mod exact;
mod sample;
mod verify;

use gbsamp_core::matching_chain::ChainConfig;

use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;
use crate::{ChainFlags, Command, RunFlags};

pub use verify::{verify_reports, VerifyPlan};

pub fn dispatch(command: &Command) -> CliResult<()> {
    match command {
        Command::SampleGbs(a) => sample::sample_gbs(a),
        Command::SampleBs(a) => sample::sample_bs(a),
        Command::Exact(c) => exact::exact(c),
        Command::Verify(a) => verify::verify(a),
        Command::Bench(c) => bench::bench(c),
        Command::BiasReport(a) => exact::bias_report(a),
    }
}

fn chain_config(flags: &ChainFlags) -> CliResult<ChainConfig> {
    let cfg = ChainConfig {
        seed: flags.seed,
        epsilon: flags.epsilon,
        step_constant: flags.step_constant,
        max_steps_override: flags.max_steps,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn check_run(run: &RunFlags) -> CliResult<()> {
    if run.samples < 1 {
        return Err(CliError::Validation("samples must be ≥ 1".into()));
    }
    if run.workers < 1 {
        return Err(CliError::Validation("workers must be ≥ 1".into()));
    }
    Ok(())
}

fn record_chain(m: &mut RunManifest, flags: &ChainFlags, run: &RunFlags) {
    m.set("epsilon", flags.epsilon)
        .set("step_constant", flags.step_constant)
        .set(
            "max_steps",
            flags.max_steps.map_or("formula".into(), |s| s.to_string()),
        )
        .set("samples", run.samples)
        .set("workers", run.workers);
}

/// Splits `total` into `parts` contiguous counts, larger ones first.
fn split(total: u64, parts: usize) -> Vec<u64> {
    let parts = parts as u64;
    (0..parts)
        .map(|i| total / parts + u64::from(i < total % parts))
        .collect()
}

/// Runs `job(i)` for `i in 0..count` on up to `workers` threads; results
/// come back in index order.
fn parallel<T: Send>(count: usize, workers: usize, job: impl Fn(usize) -> T + Sync) -> Vec<T> {
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Mutex;
    let slots: Vec<Mutex<Option<T>>> = (0..count).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..workers.clamp(1, count.max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= count {
                    break;
                }
                let r = job(i);
                *slots[i].lock().expect("no poisoned slot") = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| {
            m.into_inner()
                .expect("no poisoned slot")
                .expect("every job ran")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_counts() {
        assert_eq!(split(10, 3), [4, 3, 3]);
        assert_eq!(split(2, 4), [1, 1, 0, 0]);
        assert_eq!(split(5, 1), [5]);
    }

    #[test]
    fn parallel_keeps_order() {
        assert_eq!(parallel(7, 3, |i| i * i), [0, 1, 4, 9, 16, 25, 36]);
        assert!(parallel(0, 2, |i| i).is_empty());
    }
}
