//! Row encodings seen by the generator networks.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numcore::{Matrix, Rng};
use crate::tabular::{Block, FeatureTable, ModeNormalizer, Schema};

/// Per-column z-scoring of raw feature values, used by the plain VAE.
/// Discrete columns are treated as their numeric category index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZScoreCodec {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
    /// `Some(n)` for discrete columns with `n` categories.
    pub categories: Vec<Option<usize>>,
}

impl ZScoreCodec {
    pub fn fit(table: &FeatureTable) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::Domain("cannot standardize an empty dataset".into()));
        }
        let n = table.len() as f64;
        let cols = table.schema().feature_count();
        let mut codec = ZScoreCodec {
            means: Vec::with_capacity(cols),
            stds: Vec::with_capacity(cols),
            mins: Vec::with_capacity(cols),
            maxs: Vec::with_capacity(cols),
            categories: table
                .schema()
                .features()
                .iter()
                .map(|c| c.categories().map(<[String]>::len))
                .collect(),
        };
        for c in 0..cols {
            let v = table.features().column(c);
            let mean = v.iter().sum::<f64>() / n;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
            codec.means.push(mean);
            codec.stds.push(var.sqrt().max(1e-8));
            codec.mins.push(v.iter().copied().fold(f64::INFINITY, f64::min));
            codec.maxs.push(v.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        }
        Ok(codec)
    }

    pub fn width(&self) -> usize {
        self.means.len()
    }

    pub fn encode(&self, table: &FeatureTable) -> Matrix {
        let mut out = table.features().clone();
        let w = self.width();
        for row in out.data_mut().chunks_exact_mut(w) {
            for (c, v) in row.iter_mut().enumerate() {
                *v = (*v - self.means[c]) / self.stds[c];
            }
        }
        out
    }

    /// Inverse of `encode`, clamped to the observed range; discrete columns
    /// round to the nearest valid category.
    pub fn decode(&self, encoded: &Matrix, schema: &Arc<Schema>) -> Result<FeatureTable> {
        let w = self.width();
        if encoded.cols() != w {
            return Err(Error::Dimension(format!(
                "encoded width {} for codec width {w}",
                encoded.cols()
            )));
        }
        let mut out = encoded.clone();
        for row in out.data_mut().chunks_exact_mut(w) {
            for (c, v) in row.iter_mut().enumerate() {
                let raw = (*v * self.stds[c] + self.means[c]).clamp(self.mins[c], self.maxs[c]);
                *v = match self.categories[c] {
                    Some(n) => raw.round().clamp(0.0, (n - 1) as f64),
                    None => raw,
                };
            }
        }
        FeatureTable::new(Arc::clone(schema), out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Codec {
    Tvae(ModeNormalizer),
    Vae(ZScoreCodec),
}

impl Codec {
    pub fn width(&self) -> usize {
        match self {
            Codec::Tvae(n) => n.encoded_width(),
            Codec::Vae(z) => z.width(),
        }
    }

    pub fn encode(&self, table: &FeatureTable, rng: &mut Rng) -> Result<Matrix> {
        match self {
            Codec::Tvae(n) => n.encode(table, rng),
            Codec::Vae(z) => Ok(z.encode(table)),
        }
    }

    /// Loss layout of the decoder output. The VAE treats every entry as a
    /// squared-error scalar, so it has no blocks.
    pub fn blocks(&self) -> Vec<Block> {
        match self {
            Codec::Tvae(n) => n.blocks(),
            Codec::Vae(_) => Vec::new(),
        }
    }
}
