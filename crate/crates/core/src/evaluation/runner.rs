use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::metrics::{mape, percentile, ResultMatrix, Summary, TailSummary};
use crate::error::{Error, Result};
use crate::generators::{GeneratorConfig, GeneratorKind};
use crate::numcore::{label, Rng};
use crate::replay::{ConfigVector, ReplayPolicy, Scholar, VectorRole};
use crate::scenario::{build_tasks, Pattern, SequenceSpec, UeType, DEVICE_TYPES};
use crate::solver::{Solver, SolverConfig};
use crate::tabular::{split_train_test, TabularDataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    Naive,
    Cumulative,
    SingleGenVae,
    SingleGenTvae,
    MultiGenTvae,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Naive,
        Method::Cumulative,
        Method::SingleGenVae,
        Method::SingleGenTvae,
        Method::MultiGenTvae,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Naive => "naive",
            Method::Cumulative => "cumulative",
            Method::SingleGenVae => "singlegen-vae",
            Method::SingleGenTvae => "singlegen-tvae",
            Method::MultiGenTvae => "multigen-tvae",
        }
    }

    pub fn valid_names() -> String {
        Method::ALL.map(Method::name).join(", ")
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        Method::ALL
            .into_iter()
            .find(|m| m.name().replace('-', "") == key)
            .ok_or_else(|| {
                Error::Domain(format!("unknown method `{s}`; valid methods: {}", Method::valid_names()))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub alpha: f64,
    pub solver: SolverConfig,
    /// Generator hyperparameters; the kind is set per method.
    pub generator: GeneratorConfig,
    pub policy: ReplayPolicy,
    pub train_fraction: f64,
    pub tail_pct: f64,
    /// Tail cells with fewer test rows above the threshold are missing.
    pub min_tail_samples: usize,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            alpha: 0.5,
            solver: SolverConfig::default(),
            generator: GeneratorConfig::new(GeneratorKind::Tvae),
            policy: ReplayPolicy::MatchCurrent,
            train_fraction: 0.8,
            tail_pct: 90.0,
            min_tail_samples: 30,
        }
    }
}

impl RunSettings {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Domain(format!("alpha {} outside [0, 1]", self.alpha)));
        }
        if !(self.tail_pct > 0.0 && self.tail_pct < 100.0) {
            return Err(Error::Domain(format!("tail percentile {} outside (0, 100)", self.tail_pct)));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Domain("train fraction must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreparedTask {
    pub ue: UeType,
    pub pattern: Pattern,
    pub vector: ConfigVector,
    pub train: TabularDataset,
    pub test: TabularDataset,
}

/// A sequence with every task split into train and test rows, shared by all
/// methods run on it.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedSequence {
    pub spec: SequenceSpec,
    pub tasks: Vec<PreparedTask>,
    /// Pooled test-target percentile defining the tail.
    pub tail_threshold: f64,
}

impl PreparedSequence {
    pub fn new(spec: &SequenceSpec, train_fraction: f64, tail_pct: f64) -> Result<Self> {
        let tasks = build_tasks(spec)?
            .into_iter()
            .enumerate()
            .map(|(i, t)| {
                let mut rng = Rng::stream(spec.seed, &[label("split"), i as u64]);
                let (train, test) = split_train_test(&t.dataset, train_fraction, &mut rng)?;
                if test.is_empty() {
                    return Err(Error::Domain(format!("task {} has no test rows", i + 1)));
                }
                Ok(PreparedTask {
                    ue: t.ue,
                    pattern: t.pattern,
                    vector: t.config_vector,
                    train,
                    test,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let pooled: Vec<f64> = tasks.iter().flat_map(|t| t.test.targets().to_vec()).collect();
        Ok(PreparedSequence {
            spec: spec.clone(),
            tail_threshold: percentile(&pooled, tail_pct)?,
            tasks,
        })
    }
}

/// Everything a finished method run reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRun {
    pub method: Method,
    pub sequence: SequenceSpec,
    pub settings: RunSettings,
    pub result: ResultMatrix,
    pub summary: Summary,
    pub tail: ResultMatrix,
    pub tail_summary: TailSummary,
    /// Bytes a method retains between tasks, after each task.
    pub storage_bytes: Vec<u64>,
    /// Generator refitted after each task (generative methods).
    pub target_generators: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
enum Learner {
    Naive(Solver),
    Cumulative(Option<Solver>),
    Replay(Scholar),
}

#[derive(Serialize, Deserialize)]
struct Progress {
    method: Method,
    sequence: SequenceSpec,
    settings: RunSettings,
    completed: usize,
    result: ResultMatrix,
    tail: ResultMatrix,
    storage_bytes: Vec<u64>,
    target_generators: Vec<Option<usize>>,
}

fn input_width(seq: &PreparedSequence) -> usize {
    seq.tasks[0].train.schema().one_hot_width()
}

fn new_learner(method: Method, seq: &PreparedSequence, settings: &RunSettings) -> Result<Learner> {
    let seed = seq.spec.seed;
    let mut init = Rng::stream(seed, &[label(method.name()), label("init")]);
    let width = input_width(seq);
    let mut solver = || Solver::new(width, settings.solver.clone(), &mut init.fork());
    let generator = |kind| GeneratorConfig {
        kind,
        ..settings.generator.clone()
    };
    let all_ones = || ConfigVector::generator(vec![1.0; DEVICE_TYPES]);
    Ok(match method {
        Method::Naive => Learner::Naive(solver()?),
        Method::Cumulative => Learner::Cumulative(None),
        Method::SingleGenVae | Method::SingleGenTvae => {
            let kind = if method == Method::SingleGenVae {
                GeneratorKind::Vae
            } else {
                GeneratorKind::Tvae
            };
            Learner::Replay(Scholar::new(
                vec![(generator(kind), all_ones()?)],
                solver()?,
                settings.alpha,
                settings.policy,
            )?)
        }
        Method::MultiGenTvae => {
            let gens = seq
                .spec
                .device_types()
                .into_iter()
                .map(|ue| {
                    Ok((
                        generator(GeneratorKind::Tvae),
                        ConfigVector::one_hot(ue.index(), DEVICE_TYPES, VectorRole::Generator)?,
                    ))
                })
                .collect::<Result<_>>()?;
            Learner::Replay(Scholar::new(gens, solver()?, settings.alpha, settings.policy)?)
        }
    })
}

impl Learner {
    fn solver(&self) -> Option<&Solver> {
        match self {
            Learner::Naive(s) => Some(s),
            Learner::Cumulative(s) => s.as_ref(),
            Learner::Replay(s) => Some(s.solver()),
        }
    }

    /// Trains on task `i`; returns retained bytes and the refitted generator.
    fn learn(
        &mut self,
        method: Method,
        seq: &PreparedSequence,
        settings: &RunSettings,
        i: usize,
    ) -> Result<(u64, Option<usize>)> {
        let seed = seq.spec.seed;
        let mut rng = Rng::stream(seed, &[label(method.name()), label("task"), i as u64]);
        let task = &seq.tasks[i];
        match self {
            Learner::Naive(solver) => {
                solver.fit_task(&task.train, &[], settings.alpha, &mut rng)?;
                Ok((0, None))
            }
            Learner::Cumulative(slot) => {
                let mut union = seq.tasks[0].train.clone();
                for t in &seq.tasks[1..=i] {
                    union = union.concat(&t.train)?;
                }
                let mut init = Rng::stream(seed, &[label(method.name()), label("init"), i as u64]);
                let mut solver = Solver::new(input_width(seq), settings.solver.clone(), &mut init)?;
                solver.fit_task(&union, &[], settings.alpha, &mut rng)?;
                *slot = Some(solver);
                Ok((union.raw_bytes(), None))
            }
            Learner::Replay(scholar) => {
                let out = scholar.learn_task(&task.train, &task.vector, &mut rng)?;
                Ok((scholar.generator_bytes()?, Some(out.target)))
            }
        }
    }

    fn save(&self, dir: &Path) -> Result<()> {
        match self {
            Learner::Naive(s) => write(&dir.join("solver.bin"), &s.to_bytes()?),
            Learner::Cumulative(_) => Ok(()),
            Learner::Replay(s) => s.save(&dir.join("scholar")),
        }
    }

    fn load(method: Method, dir: &Path) -> Result<Self> {
        Ok(match method {
            Method::Naive => {
                let path = dir.join("solver.bin");
                Learner::Naive(Solver::from_bytes(&fs::read(&path).map_err(|e| Error::io(&path, e))?)?)
            }
            Method::Cumulative => Learner::Cumulative(None),
            _ => Learner::Replay(Scholar::load(&dir.join("scholar"))?),
        })
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn evaluate(
    solver: &Solver,
    seq: &PreparedSequence,
    settings: &RunSettings,
    i: usize,
    result: &mut ResultMatrix,
    tail: &mut ResultMatrix,
) -> Result<()> {
    for (j, t) in seq.tasks.iter().enumerate() {
        let pred = solver.predict(t.test.table())?;
        let y = t.test.targets();
        result.set(i, j, Some(mape(y, &pred)?));
        let (ty, tp): (Vec<f64>, Vec<f64>) = y
            .iter()
            .zip(&pred)
            .filter(|(y, _)| **y > seq.tail_threshold)
            .map(|(a, b)| (*a, *b))
            .unzip();
        let cell = if ty.len() >= settings.min_tail_samples.max(1) {
            Some(mape(&ty, &tp)?)
        } else {
            None
        };
        tail.set(i, j, cell);
    }
    Ok(())
}

/// Trains `method` through the sequence, filling every row of the result
/// matrices. With a checkpoint directory, progress is saved after each task
/// and an existing checkpoint is resumed; random streams depend only on
/// (seed, method, task), so a resumed run equals an uninterrupted one.
pub fn run_method(
    method: Method,
    seq: &PreparedSequence,
    settings: &RunSettings,
    checkpoint: Option<&Path>,
) -> Result<MethodRun> {
    let state = advance(method, seq, settings, checkpoint, seq.tasks.len())?;
    let summary = Summary::of(&state.result)?;
    let tail_summary = TailSummary::of(&state.tail, seq.tail_threshold);
    Ok(MethodRun {
        method,
        sequence: state.sequence,
        settings: state.settings,
        result: state.result,
        summary,
        tail: state.tail,
        tail_summary,
        storage_bytes: state.storage_bytes,
        target_generators: state.target_generators,
    })
}

/// Trains through task `limit` (exclusive) and returns how many tasks are
/// complete; stands in for an interrupted run.
#[cfg(test)]
pub(crate) fn run_partial(
    method: Method,
    seq: &PreparedSequence,
    settings: &RunSettings,
    checkpoint: &Path,
    limit: usize,
) -> Result<usize> {
    Ok(advance(method, seq, settings, Some(checkpoint), limit.min(seq.tasks.len()))?.completed)
}

fn advance(
    method: Method,
    seq: &PreparedSequence,
    settings: &RunSettings,
    checkpoint: Option<&Path>,
    limit: usize,
) -> Result<Progress> {
    settings.validate()?;
    let n = seq.tasks.len();
    let mut state = Progress {
        method,
        sequence: seq.spec.clone(),
        settings: settings.clone(),
        completed: 0,
        result: ResultMatrix::new(n),
        tail: ResultMatrix::new(n),
        storage_bytes: Vec::with_capacity(n),
        target_generators: Vec::with_capacity(n),
    };
    let mut learner = None;
    if let Some(dir) = checkpoint {
        let path = dir.join("progress.json");
        if path.exists() {
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let saved: Progress =
                serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
            if saved.method != method || saved.sequence != seq.spec || saved.settings != *settings {
                return Err(Error::State(format!(
                    "checkpoint in {} belongs to a different run",
                    dir.display()
                )));
            }
            if saved.completed > 0 {
                learner = Some(Learner::load(method, dir)?);
            }
            state = saved;
        }
    }
    let mut learner = match learner {
        Some(l) => l,
        None => new_learner(method, seq, settings)?,
    };
    for i in state.completed..limit {
        log::info!("{} {} seed {}: task {}/{}", seq.spec.name(), method, seq.spec.seed, i + 1, n);
        let (bytes, target) = learner.learn(method, seq, settings, i)?;
        let solver = learner.solver().expect("a solver exists after training");
        evaluate(solver, seq, settings, i, &mut state.result, &mut state.tail)?;
        state.storage_bytes.push(bytes);
        state.target_generators.push(target);
        state.completed = i + 1;
        if let Some(dir) = checkpoint {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            learner.save(dir)?;
            let text = serde_json::to_string(&state).map_err(|e| Error::Format(e.to_string()))?;
            write(&dir.join("progress.json"), text.as_bytes())?;
        }
    }
    Ok(state)
}

