//! Resolution of flags, scenario file and defaults into a run plan.
//! Precedence: flag, then scenario file, then default.

use std::path::PathBuf;

use replayforge_core::evaluation::{Method, RunSettings};
use replayforge_core::replay::ReplayPolicy;
use replayforge_core::scenario::{ScenarioFile, SequenceSpec};

use crate::{Failure, RunArgs};

pub const DEFAULT_SAMPLES: usize = 2000;
pub const DEFAULT_SEED_COUNT: u64 = 5;
pub const SEED_ENV: &str = "REPLAYFORGE_SEED";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// One sequence per seed, in seed order.
    pub sequences: Vec<SequenceSpec>,
    pub methods: Vec<Method>,
    pub settings: RunSettings,
    pub out: PathBuf,
    pub jobs: usize,
    pub resume: Option<PathBuf>,
}

/// Base seed from `REPLAYFORGE_SEED`, or 1.
pub fn base_seed() -> Result<u64, Failure> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("{SEED_ENV}=`{v}` is not an unsigned integer"))),
        Err(_) => Ok(1),
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

pub fn resolve(args: &RunArgs) -> Result<RunConfig, Failure> {
    let file = match &args.scenario {
        Some(path) => ScenarioFile::from_file(path).map_err(|e| usage(format!("{}: {e}", path.display())))?,
        None => ScenarioFile::default(),
    };
    let samples = args.samples.or(file.samples).unwrap_or(DEFAULT_SAMPLES);
    let seeds = match (&args.seeds, &file.seeds, file.seed) {
        (Some(s), _, _) | (None, Some(s), _) => s.clone(),
        (None, None, Some(s)) => vec![s],
        (None, None, None) => {
            let base = base_seed()?;
            (0..DEFAULT_SEED_COUNT).map(|i| base.wrapping_add(i)).collect()
        }
    };
    if seeds.is_empty() {
        return Err(usage("at least one seed is required"));
    }
    let case = args.case.or(file.case);
    let sequences = seeds
        .iter()
        .map(|&seed| match (case, &file.ue, &file.pattern) {
            (Some(c), _, _) => SequenceSpec::from_case(c, samples, seed),
            (None, Some(ue), Some(p)) => SequenceSpec::custom(ue.clone(), p.clone(), samples, seed),
            _ => Err(replayforge_core::Error::Domain(
                "choose a sequence with --case or a scenario file".into(),
            )),
        })
        .map(|s| s.and_then(|s| s.validate().map(|()| s)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(usage)?;

    let names = match (&args.methods, &file.methods) {
        (Some(m), _) | (None, Some(m)) => m.clone(),
        (None, None) => Method::ALL.iter().map(|m| m.name().to_string()).collect(),
    };
    let mut methods = Vec::new();
    for n in names.iter().filter(|n| !n.trim().is_empty()) {
        let m: Method = n.parse().map_err(usage)?;
        if !methods.contains(&m) {
            methods.push(m);
        }
    }
    if methods.is_empty() {
        return Err(usage(format!("no methods given; valid methods: {}", Method::valid_names())));
    }

    let mut settings = RunSettings::default();
    settings.alpha = args.alpha.or(file.alpha).unwrap_or(settings.alpha);
    settings.tail_pct = args.tail_pct.or(file.tail_pct).unwrap_or(settings.tail_pct);
    if let Some(e) = args.solver_epochs.or(file.solver_epochs) {
        settings.solver.epochs = e;
    }
    if let Some(e) = args.generator_epochs.or(file.generator_epochs) {
        settings.generator.epochs = e;
    }
    if let Some(p) = &args.policy {
        settings.policy = match p.as_str() {
            "match-current" => ReplayPolicy::MatchCurrent,
            other => return Err(usage(format!("unknown replay policy `{other}`; valid: match-current"))),
        };
    }
    settings.validate().map_err(usage)?;
    if settings.solver.epochs == 0 || settings.generator.epochs == 0 {
        return Err(usage("epoch counts must be at least 1"));
    }
    if args.jobs == 0 {
        return Err(usage("--jobs must be at least 1"));
    }
    Ok(RunConfig {
        sequences,
        methods,
        settings,
        out: args.out.clone().unwrap_or_else(|| PathBuf::from("runs")),
        jobs: args.jobs,
        resume: args.resume.clone(),
    })
}
