use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::selector::{relevance, replay_counts, select_target, ConfigVector, ReplayPolicy};
use crate::error::{Error, Result};
use crate::generators::{Generator, GeneratorConfig};
use crate::numcore::Rng;
use crate::solver::{Solver, TrainReport};
use crate::tabular::TabularDataset;

/// Synthetic rows from one generator, labeled by the pre-task solver.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplaySet {
    pub generator: usize,
    pub data: TabularDataset,
}

#[derive(Debug, Clone)]
pub struct TaskOutcome {
    pub target: usize,
    pub relevance: Vec<f64>,
    pub replay_counts: Vec<(usize, usize)>,
    pub solver: TrainReport,
}

/// A set of generators, each with a configuration vector, and one solver.
#[derive(Debug, Clone, PartialEq)]
pub struct Scholar {
    generators: Vec<Generator>,
    vectors: Vec<ConfigVector>,
    solver: Solver,
    alpha: f64,
    policy: ReplayPolicy,
    task_index: usize,
}

impl Scholar {
    pub fn new(
        generators: Vec<(GeneratorConfig, ConfigVector)>,
        solver: Solver,
        alpha: f64,
        policy: ReplayPolicy,
    ) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::Domain("a scholar needs at least one generator".into()));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Domain(format!("alpha {alpha} outside [0, 1]")));
        }
        let j = generators[0].1.len();
        let mut gens = Vec::with_capacity(generators.len());
        let mut vectors = Vec::with_capacity(generators.len());
        for (config, b) in generators {
            if b.len() != j {
                return Err(Error::Dimension("generator vectors differ in length".into()));
            }
            gens.push(Generator::new(config)?);
            vectors.push(ConfigVector::generator(b.entries().to_vec())?);
        }
        Ok(Scholar {
            generators: gens,
            vectors,
            solver,
            alpha,
            policy,
            task_index: 0,
        })
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn vectors(&self) -> &[ConfigVector] {
        &self.vectors
    }

    pub fn solver(&self) -> &Solver {
        &self.solver
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn task_index(&self) -> usize {
        self.task_index
    }

    /// Samples from every trained generator per the replay policy and labels
    /// the rows with the current solver. Empty before the first task.
    pub fn generate_replay(&self, current_n: usize, rng: &mut Rng) -> Result<Vec<ReplaySet>> {
        let trained: Vec<usize> = (0..self.generators.len())
            .filter(|&k| self.generators[k].is_trained())
            .collect();
        let counts = replay_counts(self.policy, current_n, trained.len());
        let mut out = Vec::with_capacity(trained.len());
        for (&k, &n) in trained.iter().zip(&counts) {
            let mut stream = rng.fork();
            if n == 0 {
                continue;
            }
            let features = self.generators[k].sample(n, &mut stream)?;
            let targets = self.solver.predict(&features)?;
            out.push(ReplaySet {
                generator: k,
                data: TabularDataset::new(features, targets)?,
            });
        }
        Ok(out)
    }

    /// One continual-learning step: solver update on real plus replayed
    /// rows, target-generator selection, and a refit of only that generator
    /// on the real features joined with its own replay.
    pub fn learn_task(
        &mut self,
        train: &TabularDataset,
        task_vector: &ConfigVector,
        rng: &mut Rng,
    ) -> Result<TaskOutcome> {
        if train.is_empty() {
            return Err(Error::Domain("task without training rows".into()));
        }
        let mut replay_rng = rng.fork();
        let mut solver_rng = rng.fork();
        let mut own_rng = rng.fork();
        let mut fit_rng = rng.fork();

        let replay = self.generate_replay(train.len(), &mut replay_rng)?;
        let sets: Vec<TabularDataset> = replay.iter().map(|r| r.data.clone()).collect();
        let report = self.solver.fit_task(train, &sets, self.alpha, &mut solver_rng)?;

        let r = relevance(task_vector, &self.vectors)?;
        let target = select_target(&r)?;
        let g = &self.generators[target];
        let mixed = if g.is_trained() {
            let own = g.sample(train.len(), &mut own_rng)?;
            train.table().concat(&own)?
        } else {
            train.table().clone()
        };
        self.generators[target].fit(&mixed, &mut fit_rng)?;
        self.task_index += 1;
        Ok(TaskOutcome {
            target,
            relevance: r,
            replay_counts: replay.iter().map(|s| (s.generator, s.data.len())).collect(),
            solver: report,
        })
    }

    /// Serialized size of every trained generator.
    pub fn generator_bytes(&self) -> Result<u64> {
        let mut total = 0;
        for g in self.generators.iter().filter(|g| g.is_trained()) {
            total += g.to_bytes()?.len() as u64;
        }
        Ok(total)
    }

    /// Writes `manifest.json`, `solver.bin` and one `generator_<k>.bin` per
    /// trained generator into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut entries = Vec::with_capacity(self.generators.len());
        for (k, g) in self.generators.iter().enumerate() {
            let file = if g.is_trained() {
                let name = format!("generator_{k}.bin");
                let path = dir.join(&name);
                fs::write(&path, g.to_bytes()?).map_err(|e| Error::io(&path, e))?;
                Some(name)
            } else {
                None
            };
            entries.push(ManifestGenerator {
                config: g.config().clone(),
                vector: self.vectors[k].entries().to_vec(),
                file,
            });
        }
        let path = dir.join("solver.bin");
        fs::write(&path, self.solver.to_bytes()?).map_err(|e| Error::io(&path, e))?;
        let manifest = Manifest {
            task_index: self.task_index,
            alpha: self.alpha,
            policy: self.policy,
            generators: entries,
        };
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Format(e.to_string()))?;
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join("manifest.json");
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let manifest: Manifest =
            serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        let path = dir.join("solver.bin");
        let solver = Solver::from_bytes(&fs::read(&path).map_err(|e| Error::io(&path, e))?)?;
        let mut scholar = Scholar::new(
            manifest
                .generators
                .iter()
                .map(|g| Ok((g.config.clone(), ConfigVector::generator(g.vector.clone())?)))
                .collect::<Result<_>>()?,
            solver,
            manifest.alpha,
            manifest.policy,
        )?;
        for (k, entry) in manifest.generators.iter().enumerate() {
            if let Some(file) = &entry.file {
                let path = dir.join(file);
                let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
                scholar.generators[k] = Generator::from_bytes(&bytes)?;
            }
        }
        scholar.task_index = manifest.task_index;
        Ok(scholar)
    }
}

#[derive(Serialize, Deserialize)]
struct ManifestGenerator {
    config: GeneratorConfig,
    vector: Vec<f64>,
    file: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    task_index: usize,
    alpha: f64,
    policy: ReplayPolicy,
    generators: Vec<ManifestGenerator>,
}

/// Two-term objective of single-generator replay,
/// `α·MSE(S(x), y) + (1 − α)·MSE(S(x′), y′)`, evaluated from predictions.
pub fn single_generator_loss(
    solver: &Solver,
    real: &TabularDataset,
    replay: &TabularDataset,
    alpha: f64,
) -> Result<f64> {
    let mse = |d: &TabularDataset| -> Result<f64> {
        let p = solver.predict(d.table())?;
        Ok(p.iter().zip(d.targets()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / d.len() as f64)
    };
    Ok(alpha * mse(real)? + (1.0 - alpha) * mse(replay)?)
}
