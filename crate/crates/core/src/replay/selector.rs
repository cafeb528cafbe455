use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VectorRole {
    Task,
    Generator,
}

/// Configuration vector over J device types: binary for tasks, soft in
/// [0, 1] for generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigVector {
    entries: Vec<f64>,
    role: VectorRole,
}

impl ConfigVector {
    pub fn task(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Domain("configuration vector must be non-empty".into()));
        }
        if let Some(v) = entries.iter().find(|v| **v != 0.0 && **v != 1.0) {
            return Err(Error::Domain(format!("task vector entry {v} is not binary")));
        }
        Ok(ConfigVector {
            entries,
            role: VectorRole::Task,
        })
    }

    pub fn generator(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Domain("configuration vector must be non-empty".into()));
        }
        if let Some(v) = entries.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Domain(format!("generator vector entry {v} outside [0, 1]")));
        }
        Ok(ConfigVector {
            entries,
            role: VectorRole::Generator,
        })
    }

    /// Indicator of position `index` among `len` entries.
    pub fn one_hot(index: usize, len: usize, role: VectorRole) -> Result<Self> {
        if index >= len {
            return Err(Error::Domain(format!("index {index} outside 0..{len}")));
        }
        let mut entries = vec![0.0; len];
        entries[index] = 1.0;
        Ok(ConfigVector { entries, role })
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn role(&self) -> VectorRole {
        self.role
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// `r_k = b_k · a`.
pub fn relevance(task: &ConfigVector, generators: &[ConfigVector]) -> Result<Vec<f64>> {
    generators
        .iter()
        .map(|b| {
            if b.len() != task.len() {
                return Err(Error::Dimension(format!(
                    "generator vector of length {} against task vector of length {}",
                    b.len(),
                    task.len()
                )));
            }
            Ok(b.entries.iter().zip(&task.entries).map(|(x, y)| x * y).sum())
        })
        .collect()
}

/// Index of the most relevant generator; ties go to the lowest index. An
/// all-zero relevance vector selects index 0 and logs a warning.
pub fn select_target(relevance: &[f64]) -> Result<usize> {
    if relevance.is_empty() {
        return Err(Error::Domain("no generators to select from".into()));
    }
    if relevance.iter().all(|r| *r == 0.0) {
        log::warn!("no generator is relevant to the task configuration; using the first");
    }
    Ok(crate::tabular::argmax(relevance))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReplayPolicy {
    /// Total replay equals the current task's row count, split equally
    /// across trained generators with the remainder to the lowest indices.
    MatchCurrent,
}

pub fn replay_counts(policy: ReplayPolicy, current_n: usize, trained: usize) -> Vec<usize> {
    match policy {
        ReplayPolicy::MatchCurrent => {
            if trained == 0 {
                return Vec::new();
            }
            let base = current_n / trained;
            let extra = current_n % trained;
            (0..trained).map(|k| base + usize::from(k < extra)).collect()
        }
    }
}
