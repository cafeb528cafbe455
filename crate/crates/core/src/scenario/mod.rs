//! Task sequences over device types and movement patterns, and the
//! synthetic delay data that stands in for measurements.

mod cases;
mod file;
mod recipe;

pub use cases::{CaseRows, CASES, CASE_COUNT};
pub use file::ScenarioFile;
pub use recipe::{
    channel_quality, mean_owd, owd_schema, spike_probability, synthesize_task_data, synthesize_with,
    Recipe, SynthesisOptions, FEATURES, LOAD_LEVELS, RECIPE,
};

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numcore::{derive_seed, label};
use crate::replay::{ConfigVector, VectorRole};
use crate::tabular::TabularDataset;

/// Number of device types; task vectors always have this length.
pub const DEVICE_TYPES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum UeType {
    Ue1,
    Ue2,
    Ue3,
}

impl UeType {
    pub const ALL: [UeType; 3] = [UeType::Ue1, UeType::Ue2, UeType::Ue3];

    /// Zero-based position.
    pub fn index(self) -> usize {
        self as usize
    }

    /// From the 1-based label.
    pub fn from_label(n: u8) -> Result<Self> {
        match n {
            1 => Ok(UeType::Ue1),
            2 => Ok(UeType::Ue2),
            3 => Ok(UeType::Ue3),
            _ => Err(Error::Domain(format!("unknown device type {n}"))),
        }
    }
}

impl fmt::Display for UeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UE{}", self.index() + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pattern {
    /// Stationary at position 1.
    P1,
    /// Stationary at position 2.
    P2,
    /// Stationary at position 3.
    P3,
    /// Rectangular route.
    P4,
    /// Zigzag between positions 1 and 3.
    P5,
    /// Linear route 1 → 2 → 3 → 1.
    P6,
}

impl Pattern {
    pub fn from_label(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Pattern::P1),
            2 => Ok(Pattern::P2),
            3 => Ok(Pattern::P3),
            4 => Ok(Pattern::P4),
            5 => Ok(Pattern::P5),
            6 => Ok(Pattern::P6),
            _ => Err(Error::Domain(format!("unknown pattern {n}"))),
        }
    }

    pub fn label(self) -> u8 {
        self as u8 + 1
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.label())
    }
}

/// One-hot task vector of `ue` over `j` device types.
pub fn task_config_vector(ue: UeType, j: usize) -> Result<ConfigVector> {
    ConfigVector::one_hot(ue.index(), j, VectorRole::Task)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceSpec {
    pub case_id: Option<u8>,
    pub ue_rows: Vec<UeType>,
    pub pattern_rows: Vec<Pattern>,
    pub samples_per_task: usize,
    pub seed: u64,
}

impl SequenceSpec {
    pub fn from_case(case_id: u8, samples_per_task: usize, seed: u64) -> Result<Self> {
        if case_id == 0 || case_id > CASE_COUNT {
            return Err(Error::Domain(format!("case id {case_id} outside 1..={CASE_COUNT}")));
        }
        let rows = &CASES[usize::from(case_id - 1)];
        Ok(SequenceSpec {
            case_id: Some(case_id),
            ue_rows: rows.ue.iter().map(|&u| UeType::from_label(u)).collect::<Result<_>>()?,
            pattern_rows: rows
                .pattern
                .iter()
                .map(|&p| Pattern::from_label(p))
                .collect::<Result<_>>()?,
            samples_per_task,
            seed,
        })
    }

    pub fn custom(
        ue_rows: Vec<UeType>,
        pattern_rows: Vec<Pattern>,
        samples_per_task: usize,
        seed: u64,
    ) -> Result<Self> {
        let spec = SequenceSpec {
            case_id: None,
            ue_rows,
            pattern_rows,
            samples_per_task,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ue_rows.is_empty() {
            return Err(Error::Domain("a sequence needs at least one task".into()));
        }
        if self.ue_rows.len() != self.pattern_rows.len() {
            return Err(Error::Domain(format!(
                "{} device entries but {} pattern entries",
                self.ue_rows.len(),
                self.pattern_rows.len()
            )));
        }
        if self.samples_per_task == 0 {
            return Err(Error::Domain("samples per task must be at least 1".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ue_rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ue_rows.is_empty()
    }

    /// Display name: `case<N>` or `custom`.
    pub fn name(&self) -> String {
        match self.case_id {
            Some(id) => format!("case{id}"),
            None => "custom".into(),
        }
    }

    /// Distinct device types in first-appearance order.
    pub fn device_types(&self) -> Vec<UeType> {
        let mut out = Vec::new();
        for u in &self.ue_rows {
            if !out.contains(u) {
                out.push(*u);
            }
        }
        out
    }

    /// Seed of task `index`'s data, independent of the other tasks.
    pub fn task_seed(&self, index: usize) -> u64 {
        derive_seed(self.seed, &[label("task-data"), index as u64])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskCondition {
    /// Zero-based position in the sequence.
    pub task_id: usize,
    pub ue: UeType,
    pub pattern: Pattern,
    pub config_vector: ConfigVector,
    pub dataset: TabularDataset,
}

/// Tasks of a fixed case with synthesized data.
pub fn build_sequence(case_id: u8, samples_per_task: usize, seed: u64) -> Result<Vec<TaskCondition>> {
    build_tasks(&SequenceSpec::from_case(case_id, samples_per_task, seed)?)
}

/// Tasks of any sequence; every task mixes all load levels.
pub fn build_tasks(spec: &SequenceSpec) -> Result<Vec<TaskCondition>> {
    spec.validate()?;
    let all_loads: Vec<usize> = (0..LOAD_LEVELS.len()).collect();
    spec.ue_rows
        .iter()
        .zip(&spec.pattern_rows)
        .enumerate()
        .map(|(i, (&ue, &pattern))| {
            Ok(TaskCondition {
                task_id: i,
                ue,
                pattern,
                config_vector: task_config_vector(ue, DEVICE_TYPES)?,
                dataset: synthesize_task_data(ue, pattern, &all_loads, spec.samples_per_task, spec.task_seed(i))?,
            })
        })
        .collect()
}

/// Writes `schema.txt` and `task_<NN>_<UE>_<P>.csv` per task into `dir`.
/// Returns the written paths, schema first.
pub fn export_tasks(tasks: &[TaskCondition], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let schema_path = dir.join("schema.txt");
    owd_schema().write_file(&schema_path)?;
    let mut out = vec![schema_path];
    for t in tasks {
        let path = dir.join(format!("task_{:02}_{}_{}.csv", t.task_id + 1, t.ue, t.pattern));
        t.dataset.write_csv(&path)?;
        out.push(path);
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
