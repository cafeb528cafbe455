use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::codec::{Codec, ZScoreCodec};
use crate::error::{Error, Result};
use crate::numcore::{Activation, AdamState, Matrix, Mlp, MlpGrads, Rng};
use crate::tabular::{fit_mode_normalizer, Block, FeatureTable, Schema};

/// Log-variance outputs are clamped to this range before exponentiation.
const LOGVAR_LIMIT: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeneratorKind {
    Vae,
    Tvae,
}

impl GeneratorKind {
    pub fn name(self) -> &'static str {
        match self {
            GeneratorKind::Vae => "vae",
            GeneratorKind::Tvae => "tvae",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub kind: GeneratorKind,
    pub latent_dim: usize,
    pub hidden_sizes: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Upper bound on mixture components per continuous column (TVAE).
    pub max_modes: usize,
    /// Fixed decoder standard deviation of the normalized scalars (TVAE).
    pub decoder_std: f64,
    /// Multiplier on the reconstruction term. Above 1 it keeps the latent
    /// code informative about low-entropy blocks such as a rare mode
    /// indicator, which the KL term would otherwise price out.
    #[serde(default = "unit_weight")]
    pub reconstruction_weight: f64,
    /// Continue from the current weights instead of re-initialising on fit.
    pub warm_start: bool,
}

impl GeneratorConfig {
    pub fn new(kind: GeneratorKind) -> Self {
        GeneratorConfig {
            kind,
            latent_dim: 32,
            hidden_sizes: vec![128, 128],
            epochs: 300,
            batch_size: 256,
            learning_rate: 1e-3,
            max_modes: 10,
            decoder_std: 0.1,
            reconstruction_weight: match kind {
                GeneratorKind::Tvae => 2.0,
                GeneratorKind::Vae => 1.0,
            },
            warm_start: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.latent_dim == 0 {
            return Err(Error::Domain("latent_dim must be at least 1".into()));
        }
        if self.hidden_sizes.is_empty() || self.hidden_sizes.contains(&0) {
            return Err(Error::Domain("hidden_sizes must be non-empty and positive".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Domain("batch_size must be at least 1".into()));
        }
        if !(self.decoder_std > 0.0) {
            return Err(Error::Domain("decoder_std must be positive".into()));
        }
        if !(self.reconstruction_weight > 0.0) || !self.reconstruction_weight.is_finite() {
            return Err(Error::Domain("reconstruction_weight must be positive and finite".into()));
        }
        Ok(())
    }
}

fn unit_weight() -> f64 {
    1.0
}

/// Loss terms of one ELBO evaluation, averaged over the batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElboParts {
    pub total: f64,
    pub reconstruction: f64,
    pub kl: f64,
}

#[derive(Debug, Clone)]
pub struct ElboGrads {
    pub encoder: MlpGrads,
    pub decoder: MlpGrads,
}

#[derive(Debug, Clone, Default)]
pub struct FitReport {
    pub epoch_losses: Vec<f64>,
}

/// A variational autoencoder used as a replay generator.
///
/// The encoder maps an encoded row to `[μ | log σ²]`; the decoder maps a
/// latent sample back to the encoded space. For the TVAE the decoder output
/// is split into tanh-squashed scalars (Gaussian likelihood with fixed σ)
/// and softmax groups (cross-entropy); the VAE uses squared error over the
/// whole z-scored row.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    config: GeneratorConfig,
    schema: Option<Arc<Schema>>,
    codec: Option<Codec>,
    encoder: Option<Mlp>,
    decoder: Option<Mlp>,
    trained: bool,
}

impl Generator {
    pub fn new(config: GeneratorConfig) -> Result<Self> {
        config.validate()?;
        Ok(Generator {
            config,
            schema: None,
            codec: None,
            encoder: None,
            decoder: None,
            trained: false,
        })
    }

    pub fn config(&self) -> &GeneratorConfig {
        &self.config
    }

    pub fn kind(&self) -> GeneratorKind {
        self.config.kind
    }

    pub fn is_trained(&self) -> bool {
        self.trained
    }

    pub fn codec(&self) -> Option<&Codec> {
        self.codec.as_ref()
    }

    pub fn encoder(&self) -> Option<&Mlp> {
        self.encoder.as_ref()
    }

    pub fn decoder(&self) -> Option<&Mlp> {
        self.decoder.as_ref()
    }

    /// Mutable encoder and decoder, for parameter-level probing.
    pub fn networks_mut(&mut self) -> Option<(&mut Mlp, &mut Mlp)> {
        match (&mut self.encoder, &mut self.decoder) {
            (Some(e), Some(d)) => Some((e, d)),
            _ => None,
        }
    }

    pub fn schema(&self) -> Option<&Arc<Schema>> {
        self.schema.as_ref()
    }

    pub fn param_count(&self) -> usize {
        self.encoder.as_ref().map_or(0, Mlp::param_count)
            + self.decoder.as_ref().map_or(0, Mlp::param_count)
    }

    /// Installs networks and codec directly (deserialization and tests).
    pub fn from_parts(
        config: GeneratorConfig,
        schema: Arc<Schema>,
        codec: Codec,
        encoder: Mlp,
        decoder: Mlp,
        trained: bool,
    ) -> Result<Self> {
        config.validate()?;
        let width = codec.width();
        let l = config.latent_dim;
        if encoder.in_dim() != width
            || encoder.out_dim() != 2 * l
            || decoder.in_dim() != l
            || decoder.out_dim() != width
        {
            return Err(Error::Dimension(format!(
                "networks do not fit codec width {width} and latent {l}"
            )));
        }
        Ok(Generator {
            config,
            schema: Some(schema),
            codec: Some(codec),
            encoder: Some(encoder),
            decoder: Some(decoder),
            trained,
        })
    }

    fn init_networks(&mut self, width: usize, rng: &mut Rng) {
        let l = self.config.latent_dim;
        let mut enc_dims = vec![width];
        enc_dims.extend(&self.config.hidden_sizes);
        enc_dims.push(2 * l);
        let mut dec_dims = vec![l];
        dec_dims.extend(&self.config.hidden_sizes);
        dec_dims.push(width);
        self.encoder = Some(Mlp::init(&enc_dims, Activation::Relu, Activation::Identity, rng));
        self.decoder = Some(Mlp::init(&dec_dims, Activation::Relu, Activation::Identity, rng));
    }

    /// Trains on `table` for the configured number of epochs. The codec is
    /// refitted on the provided rows first.
    pub fn fit(&mut self, table: &FeatureTable, rng: &mut Rng) -> Result<FitReport> {
        if table.is_empty() {
            return Err(Error::Domain("cannot fit a generator on an empty dataset".into()));
        }
        let codec = match self.config.kind {
            GeneratorKind::Tvae => Codec::Tvae(fit_mode_normalizer(table, self.config.max_modes, rng)?),
            GeneratorKind::Vae => Codec::Vae(ZScoreCodec::fit(table)?),
        };
        let width = codec.width();
        let reuse = self.config.warm_start
            && self.trained
            && self.encoder.as_ref().is_some_and(|e| e.in_dim() == width);
        if !reuse {
            self.init_networks(width, rng);
        }
        let data = codec.encode(table, rng)?;
        self.codec = Some(codec);
        self.schema = Some(Arc::clone(table.schema()));

        let mut adam = AdamState::new(self.config.learning_rate);
        let n = data.rows();
        let bs = self.config.batch_size.min(n);
        let l = self.config.latent_dim;
        let mut report = FitReport::default();
        for _ in 0..self.config.epochs {
            let perm = rng.permutation(n);
            let mut sum = 0.0;
            let mut batches = 0usize;
            for chunk in perm.chunks(bs) {
                let x = data.select_rows(chunk);
                let eps = standard_normal(chunk.len(), l, rng);
                let (parts, grads) = self.elbo_with_noise(&x, &eps)?;
                if !parts.total.is_finite() {
                    return Err(Error::training("generator.elbo", "non-finite loss"));
                }
                let encoder = self.encoder.as_mut().expect("initialised");
                let decoder = self.decoder.as_mut().expect("initialised");
                let mut slots = encoder.slots(&grads.encoder, "encoder");
                slots.extend(decoder.slots(&grads.decoder, "decoder"));
                adam.step(&mut slots)?;
                sum += parts.total;
                batches += 1;
            }
            report.epoch_losses.push(sum / batches as f64);
        }
        self.trained = true;
        Ok(report)
    }

    /// ELBO loss and parameter gradients on an encoded batch, drawing the
    /// reparameterization noise from `rng`.
    pub fn elbo_loss(&self, encoded: &Matrix, rng: &mut Rng) -> Result<(ElboParts, ElboGrads)> {
        let eps = standard_normal(encoded.rows(), self.config.latent_dim, rng);
        self.elbo_with_noise(encoded, &eps)
    }

    /// ELBO with explicit reparameterization noise `eps` (rows × latent_dim),
    /// which makes the loss a deterministic function of the parameters.
    pub fn elbo_with_noise(&self, encoded: &Matrix, eps: &Matrix) -> Result<(ElboParts, ElboGrads)> {
        let (encoder, decoder, codec) = match (&self.encoder, &self.decoder, &self.codec) {
            (Some(e), Some(d), Some(c)) => (e, d, c),
            _ => return Err(Error::State("generator networks are not initialised".into())),
        };
        let n = encoded.rows();
        let l = self.config.latent_dim;
        if n == 0 {
            return Err(Error::Domain("ELBO of an empty batch".into()));
        }
        if encoded.cols() != codec.width() {
            return Err(Error::Dimension(format!(
                "batch width {} for encoded width {}",
                encoded.cols(),
                codec.width()
            )));
        }
        if eps.shape() != (n, l) {
            return Err(Error::Dimension(format!(
                "noise {:?} for batch of {n} and latent {l}",
                eps.shape()
            )));
        }
        let inv_n = 1.0 / n as f64;

        let enc_trace = encoder.forward_trace(encoded)?;
        let stats = enc_trace.output();
        let mut z = Matrix::zeros(n, l);
        let mut kl = 0.0;
        for r in 0..n {
            let s = stats.row(r);
            for j in 0..l {
                let mu = s[j];
                let lv = s[l + j].clamp(-LOGVAR_LIMIT, LOGVAR_LIMIT);
                kl += 0.5 * (mu * mu + lv.exp() - 1.0 - lv);
                z.set(r, j, mu + (0.5 * lv).exp() * eps.get(r, j));
            }
        }
        kl *= inv_n;

        let dec_trace = decoder.forward_trace(&z)?;
        let out = dec_trace.output();
        let w = self.config.reconstruction_weight;
        let (recon, d_out) = match codec {
            Codec::Vae(_) => squared_error(out, encoded, w * inv_n),
            Codec::Tvae(_) => tabular_likelihood(out, encoded, &codec.blocks(), self.config.decoder_std, w * inv_n),
        };

        let dec_grads = decoder.backward(&dec_trace, &d_out)?;
        let dz = &dec_grads.input;
        let mut d_stats = Matrix::zeros(n, 2 * l);
        for r in 0..n {
            let s = stats.row(r);
            for j in 0..l {
                let mu = s[j];
                let raw_lv = s[l + j];
                let lv = raw_lv.clamp(-LOGVAR_LIMIT, LOGVAR_LIMIT);
                let g = dz.get(r, j);
                d_stats.set(r, j, mu * inv_n + g);
                let inside = raw_lv > -LOGVAR_LIMIT && raw_lv < LOGVAR_LIMIT;
                let d_lv = 0.5 * (lv.exp() - 1.0) * inv_n + g * eps.get(r, j) * 0.5 * (0.5 * lv).exp();
                d_stats.set(r, l + j, if inside { d_lv } else { 0.0 });
            }
        }
        let enc_grads = encoder.backward(&enc_trace, &d_stats)?;
        let parts = ElboParts {
            total: recon + kl,
            reconstruction: recon,
            kl,
        };
        Ok((
            parts,
            ElboGrads {
                encoder: enc_grads,
                decoder: dec_grads,
            },
        ))
    }

    /// Draws `n` synthetic feature rows from the prior.
    pub fn sample(&self, n: usize, rng: &mut Rng) -> Result<FeatureTable> {
        if !self.trained {
            return Err(Error::State("sampling from an untrained generator".into()));
        }
        if n == 0 {
            return Err(Error::Domain("sample count must be at least 1".into()));
        }
        let decoder = self.decoder.as_ref().expect("trained generators have networks");
        let codec = self.codec.as_ref().expect("trained generators have a codec");
        let schema = self.schema.as_ref().expect("trained generators have a schema");
        let z = standard_normal(n, self.config.latent_dim, rng);
        let mut out = decoder.forward(&z)?;
        match codec {
            Codec::Tvae(normalizer) => {
                for block in normalizer.blocks() {
                    if let Block::Scalar { index } = block {
                        for r in 0..n {
                            let a = out.get(r, index).tanh() + self.config.decoder_std * rng.normal();
                            out.set(r, index, a);
                        }
                    }
                }
                normalizer.decode(&out, schema)
            }
            Codec::Vae(z) => z.decode(&out, schema),
        }
    }
}

pub(crate) fn standard_normal(rows: usize, cols: usize, rng: &mut Rng) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.normal()).collect();
    Matrix::from_vec(rows, cols, data).expect("sized buffer")
}

/// Σ over columns of squared error, averaged over rows.
fn squared_error(out: &Matrix, target: &Matrix, inv_n: f64) -> (f64, Matrix) {
    let mut grad = Matrix::zeros(out.rows(), out.cols());
    let mut sum = 0.0;
    for ((g, o), t) in grad.data_mut().iter_mut().zip(out.data()).zip(target.data()) {
        let d = o - t;
        sum += d * d;
        *g = 2.0 * d * inv_n;
    }
    (sum * inv_n, grad)
}

/// Gaussian negative log-likelihood (up to a constant) on tanh-squashed
/// scalars plus cross-entropy on every softmax group, averaged over rows.
fn tabular_likelihood(
    out: &Matrix,
    target: &Matrix,
    blocks: &[Block],
    sigma: f64,
    inv_n: f64,
) -> (f64, Matrix) {
    let inv_var = 1.0 / (sigma * sigma);
    let mut grad = Matrix::zeros(out.rows(), out.cols());
    let mut total = 0.0;
    let mut probs = Vec::new();
    for r in 0..out.rows() {
        let o = out.row(r);
        let t = target.row(r);
        let g = grad.row_mut(r);
        for block in blocks {
            match *block {
                Block::Scalar { index } => {
                    let a = o[index].tanh();
                    let d = t[index] - a;
                    total += 0.5 * d * d * inv_var;
                    g[index] = -d * inv_var * (1.0 - a * a) * inv_n;
                }
                Block::Softmax { start, len } => {
                    let logits = &o[start..start + len];
                    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    probs.clear();
                    probs.extend(logits.iter().map(|v| (v - max).exp()));
                    let z: f64 = probs.iter().sum();
                    let log_z = z.ln() + max;
                    for (k, p) in probs.iter().enumerate() {
                        let tk = t[start + k];
                        if tk != 0.0 {
                            total -= tk * (logits[k] - log_z);
                        }
                        g[start + k] = (p / z - tk) * inv_n;
                    }
                }
            }
        }
    }
    (total * inv_n, grad)
}
