//! Mode-specific normalization.
//!
//! Each continuous value `v` is encoded as a scalar `α = (v − μ_k)/(4σ_k)`,
//! clipped to [−1, 1], followed by a one-hot indicator of the mixture
//! component `k` it was assigned to. Discrete values are one-hot. Blocks are
//! laid out in schema order.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::dataset::FeatureTable;
use super::gmm::{fit_gmm, responsibilities, GmmOptions, Mode};
use super::schema::{ColumnKind, Schema};
use crate::error::{Error, Result};
use crate::numcore::{Matrix, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ColumnTransform {
    Continuous { modes: Vec<Mode> },
    Discrete { categories: usize },
}

impl ColumnTransform {
    /// Encoded width with `capacity` indicator slots per continuous column.
    pub fn width(&self, capacity: usize) -> usize {
        match self {
            ColumnTransform::Continuous { modes } => 1 + modes.len().max(capacity),
            ColumnTransform::Discrete { categories } => *categories,
        }
    }
}

/// Output segment of an encoded row, as seen by a reconstruction loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    /// Normalized continuous scalar.
    Scalar { index: usize },
    /// One-hot group (mode indicator or discrete category).
    Softmax { start: usize, len: usize },
}

/// How the mixture component of a continuous value is chosen when encoding.
pub enum ModeChoice<'a> {
    /// Drawn proportionally to the posterior responsibilities.
    Sample(&'a mut Rng),
    /// Highest responsibility, ties to the lowest index.
    MostLikely,
}

/// Continuous columns reserve `capacity` indicator slots regardless of how
/// many modes were fitted, so the encoded width depends only on the schema
/// and the capacity. Unused slots are always zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeNormalizer {
    columns: Vec<ColumnTransform>,
    capacity: usize,
}

pub fn fit_mode_normalizer(
    table: &FeatureTable,
    max_modes: usize,
    rng: &mut Rng,
) -> Result<ModeNormalizer> {
    if table.is_empty() {
        return Err(Error::Domain("cannot fit a normalizer on an empty dataset".into()));
    }
    if max_modes == 0 {
        return Err(Error::Domain("max_modes must be at least 1".into()));
    }
    let opts = GmmOptions {
        max_modes,
        ..GmmOptions::default()
    };
    let columns = table
        .schema()
        .features()
        .iter()
        .enumerate()
        .map(|(c, col)| match &col.kind {
            ColumnKind::Continuous => {
                let values = table.features().column(c);
                let fit = fit_gmm(&values, opts, rng)?;
                Ok(ColumnTransform::Continuous { modes: fit.modes })
            }
            ColumnKind::Discrete { categories } => Ok(ColumnTransform::Discrete {
                categories: categories.len(),
            }),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ModeNormalizer {
        columns,
        capacity: max_modes,
    })
}

impl ModeNormalizer {
    /// Capacity equal to the largest fitted mode count.
    pub fn from_columns(columns: Vec<ColumnTransform>) -> Self {
        let capacity = columns
            .iter()
            .map(|c| match c {
                ColumnTransform::Continuous { modes } => modes.len(),
                ColumnTransform::Discrete { .. } => 0,
            })
            .max()
            .unwrap_or(0);
        ModeNormalizer { columns, capacity }
    }

    pub fn with_capacity(columns: Vec<ColumnTransform>, capacity: usize) -> Self {
        ModeNormalizer { columns, capacity }
    }

    pub fn columns(&self) -> &[ColumnTransform] {
        &self.columns
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn encoded_width(&self) -> usize {
        self.columns.iter().map(|c| c.width(self.capacity)).sum()
    }

    pub fn blocks(&self) -> Vec<Block> {
        let mut out = Vec::new();
        let mut at = 0;
        for col in &self.columns {
            match col {
                ColumnTransform::Continuous { modes } => {
                    out.push(Block::Scalar { index: at });
                    out.push(Block::Softmax {
                        start: at + 1,
                        len: modes.len().max(self.capacity),
                    });
                }
                ColumnTransform::Discrete { categories } => out.push(Block::Softmax {
                    start: at,
                    len: *categories,
                }),
            }
            at += col.width(self.capacity);
        }
        out
    }

    pub fn encode_row(&self, row: &[f64], mut choice: ModeChoice<'_>) -> Result<Vec<f64>> {
        if row.len() != self.columns.len() {
            return Err(Error::Dimension(format!(
                "row of {} values for {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        let mut out = vec![0.0; self.encoded_width()];
        let mut resp = Vec::new();
        let mut at = 0;
        for (v, col) in row.iter().zip(&self.columns) {
            match col {
                ColumnTransform::Continuous { modes } => {
                    responsibilities(modes, *v, &mut resp);
                    let k = match &mut choice {
                        ModeChoice::Sample(rng) => rng.categorical(&resp),
                        ModeChoice::MostLikely => argmax(&resp),
                    };
                    let m = &modes[k];
                    out[at] = ((v - m.mean) / (4.0 * m.std)).clamp(-1.0, 1.0);
                    out[at + 1 + k] = 1.0;
                }
                ColumnTransform::Discrete { categories } => {
                    let idx = *v as usize;
                    if idx >= *categories {
                        return Err(Error::Domain(format!(
                            "category index {idx} outside 0..{categories}"
                        )));
                    }
                    out[at + idx] = 1.0;
                }
            }
            at += col.width(self.capacity);
        }
        Ok(out)
    }

    /// Inverse transform. Mode and category are the argmax of their blocks
    /// over the fitted slots only (an all-zero block selects index 0); α is
    /// clipped to [−1, 1] first.
    pub fn decode_row(&self, encoded: &[f64]) -> Result<Vec<f64>> {
        if encoded.len() != self.encoded_width() {
            return Err(Error::Dimension(format!(
                "encoded row of width {}, expected {}",
                encoded.len(),
                self.encoded_width()
            )));
        }
        let mut out = Vec::with_capacity(self.columns.len());
        let mut at = 0;
        for col in &self.columns {
            match col {
                ColumnTransform::Continuous { modes } => {
                    let k = argmax(&encoded[at + 1..at + 1 + modes.len()]);
                    let alpha = encoded[at].clamp(-1.0, 1.0);
                    out.push(alpha * 4.0 * modes[k].std + modes[k].mean);
                }
                ColumnTransform::Discrete { categories } => {
                    out.push(argmax(&encoded[at..at + categories]) as f64);
                }
            }
            at += col.width(self.capacity);
        }
        Ok(out)
    }

    pub fn encode(&self, table: &FeatureTable, rng: &mut Rng) -> Result<Matrix> {
        let mut data = Vec::with_capacity(table.len() * self.encoded_width());
        for r in 0..table.len() {
            data.extend(self.encode_row(table.features().row(r), ModeChoice::Sample(rng))?);
        }
        Matrix::from_vec(table.len(), self.encoded_width(), data)
    }

    pub fn decode(&self, encoded: &Matrix, schema: &Arc<Schema>) -> Result<FeatureTable> {
        let mut data = Vec::with_capacity(encoded.rows() * self.columns.len());
        for r in 0..encoded.rows() {
            data.extend(self.decode_row(encoded.row(r))?);
        }
        FeatureTable::new(
            Arc::clone(schema),
            Matrix::from_vec(encoded.rows(), self.columns.len(), data)?,
        )
    }
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}
