//! `run`: every (seed, method) pair, reports, comparison CSV and timings.
//!
//! Outputs in the report directory:
//! - `<sequence>_<method>_seed<seed>.json` per run (deterministic);
//! - `comparison.csv` in long format for the runs of this invocation;
//! - `timing.csv` with wall-clock seconds per run (kept out of the reports
//!   so repeated runs stay byte-identical).

use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use replayforge_core::evaluation::{
    report_name, run_method, write_long_csv, write_report, Method, MethodRun, PreparedSequence,
};

use crate::config::{resolve, RunConfig};
use crate::{Failure, RunArgs};

struct Job<'a> {
    seq: &'a PreparedSequence,
    method: Method,
}

fn execute(job: &Job<'_>, cfg: &RunConfig) -> Result<(MethodRun, f64), String> {
    let started = Instant::now();
    let checkpoint = cfg.resume.as_ref().map(|root| {
        root.join(format!("{}_{}_seed{}", job.seq.spec.name(), job.method, job.seq.spec.seed))
    });
    let run = run_method(job.method, job.seq, &cfg.settings, checkpoint.as_deref()).map_err(|e| e.to_string())?;
    write_report(&cfg.out, &run).map_err(|e| e.to_string())?;
    Ok((run, started.elapsed().as_secs_f64()))
}

fn write_timing(path: &Path, rows: &[(String, f64)]) -> Result<(), Failure> {
    let mut text = String::from("report,seconds\n");
    for (name, secs) in rows {
        text.push_str(&format!("{name},{secs:.3}\n"));
    }
    fs::write(path, text).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

pub fn cmd_run(args: &RunArgs) -> Result<(), Failure> {
    let cfg = resolve(args)?;
    fs::create_dir_all(&cfg.out)
        .map_err(|e| Failure::Usage(format!("output directory {}: {e}", cfg.out.display())))?;
    let prepared = cfg
        .sequences
        .iter()
        .map(|s| PreparedSequence::new(s, cfg.settings.train_fraction, cfg.settings.tail_pct))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    let jobs: Vec<Job<'_>> = prepared
        .iter()
        .flat_map(|seq| cfg.methods.iter().map(move |&method| Job { seq, method }))
        .collect();
    let total = jobs.len();
    eprintln!(
        "running {total} runs ({} methods x {} seeds) with {} job(s) into {}",
        cfg.methods.len(),
        prepared.len(),
        cfg.jobs,
        cfg.out.display()
    );
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    let outcomes: Vec<Result<(MethodRun, f64), String>> = pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let out = execute(job, &cfg);
                match &out {
                    Ok((run, secs)) => eprintln!(
                        "done {} {} seed {} in {secs:.1}s: AveMAPE {:.4}",
                        run.sequence.name(),
                        run.method,
                        run.sequence.seed,
                        run.summary.ave_mape
                    ),
                    Err(e) => eprintln!("failed {} seed {}: {e}", job.method, job.seq.spec.seed),
                }
                out
            })
            .collect()
    });

    let mut runs = Vec::new();
    let mut timing = Vec::new();
    let mut failures = Vec::new();
    for (job, outcome) in jobs.iter().zip(outcomes) {
        match outcome {
            Ok((run, secs)) => {
                timing.push((report_name(&run), secs));
                runs.push(run);
            }
            Err(e) => failures.push(format!("{} {} seed {}: {e}", job.seq.spec.name(), job.method, job.seq.spec.seed)),
        }
    }
    let csv = cfg.out.join("comparison.csv");
    write_long_csv(&csv, &runs).map_err(|e| Failure::Runtime(e.to_string()))?;
    write_timing(&cfg.out.join("timing.csv"), &timing)?;
    if failures.is_empty() {
        eprintln!("wrote {} reports and {}", runs.len(), csv.display());
        Ok(())
    } else {
        Err(Failure::Runtime(format!(
            "{} of {total} runs failed:\n  {}",
            failures.len(),
            failures.join("\n  ")
        )))
    }
}
