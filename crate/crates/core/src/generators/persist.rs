//! Binary generator format: magic, little-endian header length, JSON
//! header (config, schema, codec layout, layer shapes), then little-endian
//! f64s: the codec statistics at fixed capacity, the encoder parameters and
//! the decoder parameters. The header and payload sizes depend only on the
//! configuration and schema, never on the fitted statistics.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::codec::Codec;
use super::model::{Generator, GeneratorConfig};
use crate::error::{Error, Result};
use crate::numcore::{Activation, DenseLayer, Matrix, Mlp};
use super::codec::ZScoreCodec;
use crate::tabular::gmm::Mode;
use crate::tabular::{ColumnTransform, ModeNormalizer, Schema};

const MAGIC: &[u8; 8] = b"RFGEN01\n";

#[derive(Serialize, Deserialize)]
struct Header {
    config: GeneratorConfig,
    trained: bool,
    schema: Schema,
    codec: CodecLayout,
    codec_values: usize,
    encoder: Vec<(usize, usize, Activation)>,
    decoder: Vec<(usize, usize, Activation)>,
}

#[derive(Serialize, Deserialize)]
enum CodecLayout {
    /// Mode slots per continuous column.
    Tvae { capacity: usize },
    Vae,
}

fn codec_values(codec: &Codec) -> (CodecLayout, Vec<f64>) {
    let mut out = Vec::new();
    match codec {
        Codec::Tvae(n) => {
            let capacity = n.capacity();
            for col in n.columns() {
                match col {
                    ColumnTransform::Continuous { modes } => {
                        out.push(modes.len() as f64);
                        for k in 0..capacity {
                            match modes.get(k) {
                                Some(m) => out.extend([m.mean, m.std, m.weight]),
                                None => out.extend([0.0; 3]),
                            }
                        }
                    }
                    ColumnTransform::Discrete { categories } => out.push(*categories as f64),
                }
            }
            (CodecLayout::Tvae { capacity }, out)
        }
        Codec::Vae(z) => {
            for c in 0..z.width() {
                out.extend([
                    z.means[c],
                    z.stds[c],
                    z.mins[c],
                    z.maxs[c],
                    z.categories[c].map_or(-1.0, |n| n as f64),
                ]);
            }
            (CodecLayout::Vae, out)
        }
    }
}

fn count(v: f64, what: &str) -> Result<usize> {
    if v < 0.0 || v.fract() != 0.0 || v > 1e9 {
        return Err(Error::Format(format!("invalid {what} {v}")));
    }
    Ok(v as usize)
}

fn codec_from_values(layout: &CodecLayout, schema: &Schema, values: &[f64]) -> Result<Codec> {
    let columns = schema.feature_count();
    let mut it = values.iter().copied();
    let mut next = || it.next().ok_or_else(|| Error::Format("truncated codec statistics".into()));
    let codec = match *layout {
        CodecLayout::Tvae { capacity } => {
            let mut cols = Vec::with_capacity(columns);
            for col in schema.features() {
                if col.categories().is_some() {
                    cols.push(ColumnTransform::Discrete {
                        categories: count(next()?, "category count")?,
                    });
                    continue;
                }
                let n = count(next()?, "mode count")?;
                if n > capacity {
                    return Err(Error::Format(format!("{n} modes exceed capacity {capacity}")));
                }
                let mut modes = Vec::with_capacity(n);
                for k in 0..capacity {
                    let (mean, std, weight) = (next()?, next()?, next()?);
                    if k < n {
                        modes.push(Mode { mean, std, weight });
                    }
                }
                cols.push(ColumnTransform::Continuous { modes });
            }
            Codec::Tvae(ModeNormalizer::with_capacity(cols, capacity))
        }
        CodecLayout::Vae => {
            let mut z = ZScoreCodec {
                means: Vec::with_capacity(columns),
                stds: Vec::with_capacity(columns),
                mins: Vec::with_capacity(columns),
                maxs: Vec::with_capacity(columns),
                categories: Vec::with_capacity(columns),
            };
            for _ in 0..columns {
                z.means.push(next()?);
                z.stds.push(next()?);
                z.mins.push(next()?);
                z.maxs.push(next()?);
                let c = next()?;
                z.categories.push(if c < 0.0 { None } else { Some(count(c, "category count")?) });
            }
            Codec::Vae(z)
        }
    };
    if it.next().is_some() {
        return Err(Error::Format("trailing codec statistics".into()));
    }
    Ok(codec)
}

fn shapes(mlp: &Mlp) -> Vec<(usize, usize, Activation)> {
    mlp.layers
        .iter()
        .map(|l| (l.in_dim(), l.out_dim(), l.activation))
        .collect()
}

fn skeleton(shapes: &[(usize, usize, Activation)]) -> Result<Mlp> {
    if shapes.is_empty() {
        return Err(Error::Format("network without layers".into()));
    }
    let layers = shapes
        .iter()
        .map(|&(i, o, act)| DenseLayer::new(Matrix::zeros(i, o), vec![0.0; o], act))
        .collect::<Result<Vec<_>>>()?;
    Ok(Mlp { layers })
}

pub(crate) fn write_f64s(out: &mut Vec<u8>, values: &[f64]) {
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub(crate) fn read_f64s(bytes: &[u8], count: usize) -> Result<Vec<f64>> {
    if bytes.len() != count * 8 {
        return Err(Error::Format(format!(
            "expected {count} parameters, found {} bytes",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}

/// Splits `magic | u64 len | header | payload`.
pub(crate) fn split_frame<'a>(bytes: &'a [u8], magic: &[u8; 8]) -> Result<(&'a [u8], &'a [u8])> {
    if bytes.len() < 16 || &bytes[..8] != magic {
        return Err(Error::Format("unrecognised file magic".into()));
    }
    let len = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let rest = &bytes[16..];
    if rest.len() < len {
        return Err(Error::Format("truncated header".into()));
    }
    Ok(rest.split_at(len))
}

pub(crate) fn frame(magic: &[u8; 8], header: &[u8], payload_len: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + header.len() + payload_len);
    out.extend_from_slice(magic);
    out.extend_from_slice(&(header.len() as u64).to_le_bytes());
    out.extend_from_slice(header);
    out
}

impl Generator {
    /// Serializes a generator with networks. Byte-identical for equal state.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let (Some(schema), Some(codec), Some(enc), Some(dec)) =
            (self.schema(), self.codec(), self.encoder(), self.decoder())
        else {
            return Err(Error::State("cannot serialize an uninitialised generator".into()));
        };
        let (layout, stats) = codec_values(codec);
        let header = Header {
            config: self.config().clone(),
            trained: self.is_trained(),
            schema: Schema::clone(schema),
            codec: layout,
            codec_values: stats.len(),
            encoder: shapes(enc),
            decoder: shapes(dec),
        };
        let header = serde_json::to_vec(&header).map_err(|e| Error::Format(e.to_string()))?;
        let mut out = frame(MAGIC, &header, 8 * (stats.len() + self.param_count()));
        write_f64s(&mut out, &stats);
        write_f64s(&mut out, &enc.flat_params());
        write_f64s(&mut out, &dec.flat_params());
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (header, payload) = split_frame(bytes, MAGIC)?;
        let header: Header =
            serde_json::from_slice(header).map_err(|e| Error::Format(e.to_string()))?;
        let mut enc = skeleton(&header.encoder)?;
        let mut dec = skeleton(&header.decoder)?;
        let nc = header.codec_values;
        let ne = enc.param_count();
        let values = read_f64s(payload, nc + ne + dec.param_count())?;
        let codec = codec_from_values(&header.codec, &header.schema, &values[..nc])?;
        enc.load_flat_params(&values[nc..nc + ne])?;
        dec.load_flat_params(&values[nc + ne..])?;
        Generator::from_parts(
            header.config,
            Arc::new(header.schema),
            codec,
            enc,
            dec,
            header.trained,
        )
    }
}
