//! Flat `key = value` scenario documents. Blank lines and text after `#`
//! are ignored. Recognised keys:
//!
//! | key                | value                                   |
//! |--------------------|-----------------------------------------|
//! | `case`             | fixed sequence id, 1..=8                |
//! | `ue`               | comma-separated device labels (1..=3)   |
//! | `pattern`          | comma-separated pattern labels (1..=6)  |
//! | `samples`          | rows per task                           |
//! | `seed`             | single run seed                         |
//! | `seeds`            | comma-separated run seeds               |
//! | `alpha`            | real-data mixing weight in [0, 1]       |
//! | `methods`          | comma-separated method names            |
//! | `tail_pct`         | tail percentile in (0, 100)             |
//! | `solver_epochs`    | solver epochs per task                  |
//! | `generator_epochs` | generator epochs per fit                |
//!
//! `case` and explicit `ue`/`pattern` rows are mutually exclusive.

use std::path::Path;
use std::str::FromStr;

use super::{Pattern, UeType};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScenarioFile {
    pub case: Option<u8>,
    pub ue: Option<Vec<UeType>>,
    pub pattern: Option<Vec<Pattern>>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub seeds: Option<Vec<u64>>,
    pub alpha: Option<f64>,
    pub methods: Option<Vec<String>>,
    pub tail_pct: Option<f64>,
    pub solver_epochs: Option<usize>,
    pub generator_epochs: Option<usize>,
}

fn scalar<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Parse {
        row: line,
        column: key.into(),
        message: format!("cannot parse `{value}`"),
    })
}

fn list<T: FromStr>(line: usize, key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| scalar(line, key, s))
        .collect()
}

fn labels<T>(line: usize, key: &str, value: &str, f: impl Fn(u8) -> Result<T>) -> Result<Vec<T>> {
    list::<u8>(line, key, value)?
        .into_iter()
        .map(|n| {
            f(n).map_err(|e| Error::Parse {
                row: line,
                column: key.into(),
                message: e.to_string(),
            })
        })
        .collect()
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = ScenarioFile::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(Error::Parse {
                    row: line,
                    column: content.into(),
                    message: "expected `key = value`".into(),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            match key {
                "case" => out.case = Some(scalar(line, key, value)?),
                "ue" => out.ue = Some(labels(line, key, value, UeType::from_label)?),
                "pattern" => out.pattern = Some(labels(line, key, value, Pattern::from_label)?),
                "samples" => out.samples = Some(scalar(line, key, value)?),
                "seed" => out.seed = Some(scalar(line, key, value)?),
                "seeds" => out.seeds = Some(list(line, key, value)?),
                "alpha" => out.alpha = Some(scalar(line, key, value)?),
                "methods" => out.methods = Some(list(line, key, value)?),
                "tail_pct" => out.tail_pct = Some(scalar(line, key, value)?),
                "solver_epochs" => out.solver_epochs = Some(scalar(line, key, value)?),
                "generator_epochs" => out.generator_epochs = Some(scalar(line, key, value)?),
                _ => {
                    return Err(Error::Parse {
                        row: line,
                        column: key.into(),
                        message: "unknown key".into(),
                    })
                }
            }
        }
        if out.case.is_some() && (out.ue.is_some() || out.pattern.is_some()) {
            return Err(Error::Domain("`case` cannot be combined with explicit rows".into()));
        }
        if out.ue.is_some() != out.pattern.is_some() {
            return Err(Error::Domain("`ue` and `pattern` must be given together".into()));
        }
        Ok(out)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}
