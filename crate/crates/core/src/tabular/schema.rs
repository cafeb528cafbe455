use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnKind {
    Continuous,
    Discrete { categories: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

impl Column {
    pub fn continuous(name: impl Into<String>) -> Self {
        Column {
            name: name.into(),
            kind: ColumnKind::Continuous,
        }
    }

    pub fn discrete(name: impl Into<String>, categories: Vec<String>) -> Self {
        Column {
            name: name.into(),
            kind: ColumnKind::Discrete { categories },
        }
    }

    pub fn categories(&self) -> Option<&[String]> {
        match &self.kind {
            ColumnKind::Discrete { categories } => Some(categories),
            ColumnKind::Continuous => None,
        }
    }
}

/// Feature columns plus a continuous regression target.
///
/// `target_position` is where the target sits in the CSV column order;
/// features keep their relative order around it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    features: Vec<Column>,
    target: String,
    target_position: usize,
}

impl Schema {
    pub fn new(features: Vec<Column>, target: impl Into<String>, target_position: usize) -> Result<Self> {
        let target = target.into();
        if target_position > features.len() {
            return Err(Error::Schema(format!(
                "target position {target_position} beyond {} feature columns",
                features.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for name in features.iter().map(|c| c.name.as_str()).chain([target.as_str()]) {
            if name.is_empty() {
                return Err(Error::Schema("empty column name".into()));
            }
            if !seen.insert(name) {
                return Err(Error::Schema(format!("duplicate column name `{name}`")));
            }
        }
        for col in &features {
            if let ColumnKind::Discrete { categories } = &col.kind {
                if categories.is_empty() {
                    return Err(Error::Schema(format!(
                        "discrete column `{}` has no categories",
                        col.name
                    )));
                }
                let distinct: std::collections::HashSet<_> = categories.iter().collect();
                if distinct.len() != categories.len() {
                    return Err(Error::Schema(format!(
                        "discrete column `{}` repeats a category",
                        col.name
                    )));
                }
            }
        }
        Ok(Schema {
            features,
            target,
            target_position,
        })
    }

    /// Schema with the target as the last CSV column.
    pub fn with_trailing_target(features: Vec<Column>, target: impl Into<String>) -> Result<Self> {
        let n = features.len();
        Schema::new(features, target, n)
    }

    pub fn features(&self) -> &[Column] {
        &self.features
    }

    pub fn feature_count(&self) -> usize {
        self.features.len()
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn target_position(&self) -> usize {
        self.target_position
    }

    /// Column names in CSV order.
    pub fn csv_header(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self.features.iter().map(|c| c.name.as_str()).collect();
        names.insert(self.target_position, &self.target);
        names
    }

    /// Width of the feature vector with discrete columns one-hot expanded.
    pub fn one_hot_width(&self) -> usize {
        self.features
            .iter()
            .map(|c| c.categories().map_or(1, <[String]>::len))
            .sum()
    }

    /// Sidecar text format: one `name,kind[,cat1|cat2|...]` line per CSV
    /// column, then `target,<name>`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut feats = self.features.iter();
        for i in 0..=self.features.len() {
            if i == self.target_position {
                let _ = writeln!(out, "{},continuous", self.target);
            } else {
                let col = feats.next().expect("feature count matches positions");
                match &col.kind {
                    ColumnKind::Continuous => {
                        let _ = writeln!(out, "{},continuous", col.name);
                    }
                    ColumnKind::Discrete { categories } => {
                        let _ = writeln!(out, "{},discrete,{}", col.name, categories.join("|"));
                    }
                }
            }
        }
        let _ = writeln!(out, "target,{}", self.target);
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect();
        let (last, body) = lines
            .split_last()
            .ok_or_else(|| Error::Schema("empty schema file".into()))?;
        let target = last
            .strip_prefix("target,")
            .ok_or_else(|| Error::Schema("last line must be `target,<name>`".into()))?
            .trim()
            .to_string();

        let mut features = Vec::new();
        let mut target_position = None;
        for (lineno, line) in body.iter().enumerate() {
            let mut parts = line.splitn(3, ',');
            let name = parts.next().unwrap_or("").trim();
            let kind = parts.next().map(str::trim).ok_or_else(|| {
                Error::Schema(format!("line {}: expected `name,kind`", lineno + 1))
            })?;
            match kind {
                "continuous" => {
                    if name == target {
                        target_position = Some(features.len());
                    } else {
                        features.push(Column::continuous(name));
                    }
                }
                "discrete" => {
                    if name == target {
                        return Err(Error::Schema(format!("target `{target}` must be continuous")));
                    }
                    let cats = parts.next().ok_or_else(|| {
                        Error::Schema(format!("line {}: discrete column lacks categories", lineno + 1))
                    })?;
                    let categories = cats
                        .split('|')
                        .map(|c| c.trim().to_string())
                        .filter(|c| !c.is_empty())
                        .collect();
                    features.push(Column::discrete(name, categories));
                }
                other => {
                    return Err(Error::Schema(format!(
                        "line {}: unknown column kind `{other}`",
                        lineno + 1
                    )))
                }
            }
        }
        let target_position = target_position
            .ok_or_else(|| Error::Schema(format!("target `{target}` is not declared as a column")))?;
        Schema::new(features, target, target_position)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Schema::parse(&text)
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}
