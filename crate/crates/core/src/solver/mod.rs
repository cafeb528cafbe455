//! The regression model trained on mixtures of real and replayed rows.
//!
//! Inputs are the one-hot expansion of a feature table, z-scored by a
//! per-column standardizer. The network is a ReLU MLP with a linear scalar
//! output.

mod standardizer;

pub use standardizer::Standardizer;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::persist::{frame, read_f64s, split_frame, write_f64s};
use crate::numcore::{Activation, AdamState, DenseLayer, Matrix, Mlp, MlpGrads, Rng};
use crate::tabular::{FeatureTable, TabularDataset};

const MAGIC: &[u8; 8] = b"RFSOLV1\n";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub hidden_sizes: Vec<usize>,
    /// Epochs per task.
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Weight of the running statistics when a later task updates the
    /// standardizer.
    pub ema_decay: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            hidden_sizes: vec![200, 150, 100, 50],
            epochs: 100,
            batch_size: 256,
            learning_rate: 1e-3,
            ema_decay: 0.99,
        }
    }
}

/// Loss terms of one objective evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveParts {
    /// `α·real + (1 − α)·mean(replay)`, or `real` when there is no replay.
    pub total: f64,
    pub real: f64,
    /// One mean squared error per replay set.
    pub replay: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct TrainReport {
    /// Mean total loss over the steps of each epoch.
    pub epoch_losses: Vec<f64>,
    /// Every optimizer step in order.
    pub steps: Vec<ObjectiveParts>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solver {
    config: SolverConfig,
    net: Mlp,
    standardizer: Standardizer,
    tasks_seen: usize,
}

/// Rows already expanded and standardized for the network.
struct Prepared {
    inputs: Matrix,
    targets: Vec<f64>,
}

impl Solver {
    /// Fresh solver for inputs of `input_width` one-hot columns.
    pub fn new(input_width: usize, config: SolverConfig, rng: &mut Rng) -> Result<Self> {
        if input_width == 0 {
            return Err(Error::Domain("solver input width must be positive".into()));
        }
        if config.hidden_sizes.contains(&0) || config.batch_size == 0 {
            return Err(Error::Domain("solver sizes must be positive".into()));
        }
        if !(0.0..=1.0).contains(&config.ema_decay) {
            return Err(Error::Domain("ema_decay must lie in [0, 1]".into()));
        }
        let mut dims = vec![input_width];
        dims.extend(&config.hidden_sizes);
        dims.push(1);
        Ok(Solver {
            net: Mlp::init(&dims, Activation::Relu, Activation::Identity, rng),
            standardizer: Standardizer::identity(input_width),
            config,
            tasks_seen: 0,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn network(&self) -> &Mlp {
        &self.net
    }

    pub fn network_mut(&mut self) -> &mut Mlp {
        &mut self.net
    }

    pub fn standardizer(&self) -> &Standardizer {
        &self.standardizer
    }

    pub fn tasks_seen(&self) -> usize {
        self.tasks_seen
    }

    pub fn input_width(&self) -> usize {
        self.net.in_dim()
    }

    fn prepare_inputs(&self, table: &FeatureTable) -> Result<Matrix> {
        let x = table.one_hot();
        if x.cols() != self.input_width() {
            return Err(Error::Dimension(format!(
                "{} input columns for a solver of width {}",
                x.cols(),
                self.input_width()
            )));
        }
        Ok(self.standardizer.apply(&x))
    }

    fn prepare(&self, data: &TabularDataset) -> Result<Prepared> {
        Ok(Prepared {
            inputs: self.prepare_inputs(data.table())?,
            targets: data.targets().to_vec(),
        })
    }

    pub fn predict(&self, table: &FeatureTable) -> Result<Vec<f64>> {
        if table.is_empty() {
            return Ok(Vec::new());
        }
        let x = self.prepare_inputs(table)?;
        Ok(self.net.forward(&x)?.into_vec())
    }

    /// Predictions on already-expanded one-hot inputs.
    pub fn predict_matrix(&self, one_hot: &Matrix) -> Result<Vec<f64>> {
        if one_hot.cols() != self.input_width() {
            return Err(Error::Dimension(format!(
                "{} input columns for a solver of width {}",
                one_hot.cols(),
                self.input_width()
            )));
        }
        Ok(self.net.forward(&self.standardizer.apply(one_hot))?.into_vec())
    }

    /// Per-task setup on the real rows: the first task fits the standardizer
    /// and sets the output bias to the target mean; later tasks blend the
    /// standardizer statistics by exponential moving average.
    pub fn begin_task(&mut self, real: &TabularDataset) -> Result<()> {
        if real.is_empty() {
            return Err(Error::Domain("task without training rows".into()));
        }
        let x = real.table().one_hot();
        if x.cols() != self.input_width() {
            return Err(Error::Dimension(format!(
                "{} input columns for a solver of width {}",
                x.cols(),
                self.input_width()
            )));
        }
        if self.tasks_seen == 0 {
            self.standardizer = Standardizer::fit(&x);
            let mean = real.targets().iter().sum::<f64>() / real.len() as f64;
            let out = self.net.layers.last_mut().expect("at least one layer");
            out.bias[0] = mean;
        } else {
            self.standardizer.blend(&x, self.config.ema_decay);
        }
        self.tasks_seen += 1;
        Ok(())
    }

    /// `begin_task` followed by `config.epochs` epochs of training.
    pub fn fit_task(
        &mut self,
        real: &TabularDataset,
        replay: &[TabularDataset],
        alpha: f64,
        rng: &mut Rng,
    ) -> Result<TrainReport> {
        self.begin_task(real)?;
        self.train_epochs(real, replay, alpha, self.config.epochs, rng)
    }

    /// Minimizes `α·MSE(real) + (1 − α)·mean_k MSE(replay_k)` with Adam.
    ///
    /// Each epoch walks a permutation of the real rows in batches; step `s`
    /// pairs real batch `s` with the `s`-th of an equal number of slices of
    /// every replay set's own permutation. Real and replay shuffles use
    /// separate streams forked from `rng`, so the real trajectory does not
    /// depend on whether replay sets are present.
    pub fn train_epochs(
        &mut self,
        real: &TabularDataset,
        replay: &[TabularDataset],
        alpha: f64,
        epochs: usize,
        rng: &mut Rng,
    ) -> Result<TrainReport> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Domain(format!("alpha {alpha} outside [0, 1]")));
        }
        if real.is_empty() {
            return Err(Error::Domain("task without training rows".into()));
        }
        let real = self.prepare(real)?;
        let replay: Vec<Prepared> = replay
            .iter()
            .filter(|r| !r.is_empty())
            .map(|r| self.prepare(r))
            .collect::<Result<_>>()?;
        let mut real_rng = rng.fork();
        let mut replay_rng = rng.fork();
        let mut adam = AdamState::new(self.config.learning_rate);
        let n = real.targets.len();
        let bs = self.config.batch_size.min(n);
        let steps = n.div_ceil(bs);
        let mut report = TrainReport::default();
        for _ in 0..epochs {
            let perm = real_rng.permutation(n);
            let replay_perms: Vec<Vec<usize>> = replay
                .iter()
                .map(|r| replay_rng.permutation(r.targets.len()))
                .collect();
            let mut sum = 0.0;
            for (s, chunk) in perm.chunks(bs).enumerate() {
                let real_batch = gather(&real, chunk);
                let replay_batches: Vec<Prepared> = replay
                    .iter()
                    .zip(&replay_perms)
                    .map(|(r, p)| gather(r, slice_for_step(p, s, steps)))
                    .collect();
                let (parts, grads) = self.objective_grads(&real_batch, &replay_batches, alpha)?;
                let mut slots = self.net.slots(&grads, "solver");
                adam.step(&mut slots)?;
                sum += parts.total;
                report.steps.push(parts);
            }
            report.epoch_losses.push(sum / steps as f64);
        }
        Ok(report)
    }

    /// Objective on whole datasets with the current parameters.
    pub fn objective(
        &self,
        real: &TabularDataset,
        replay: &[TabularDataset],
        alpha: f64,
    ) -> Result<ObjectiveParts> {
        Ok(self.objective_gradient(real, replay, alpha)?.0)
    }

    /// Objective and its gradient with respect to every network parameter,
    /// exactly as used by a training step.
    pub fn objective_gradient(
        &self,
        real: &TabularDataset,
        replay: &[TabularDataset],
        alpha: f64,
    ) -> Result<(ObjectiveParts, MlpGrads)> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Domain(format!("alpha {alpha} outside [0, 1]")));
        }
        let real = self.prepare(real)?;
        let replay: Vec<Prepared> = replay
            .iter()
            .filter(|r| !r.is_empty())
            .map(|r| self.prepare(r))
            .collect::<Result<_>>()?;
        self.objective_grads(&real, &replay, alpha)
    }

    /// Loss and gradient. Real and replay gradients are computed in
    /// separate passes and combined as `α·g_real + (1 − α)·g_replay`.
    fn objective_grads(
        &self,
        real: &Prepared,
        replay: &[Prepared],
        alpha: f64,
    ) -> Result<(ObjectiveParts, MlpGrads)> {
        let (real_loss, mut grads) = self.mse_pass(&real.inputs, &real.targets, &[real.targets.len()])?;
        let real_loss = real_loss[0];
        if replay.is_empty() {
            if !real_loss.is_finite() {
                return Err(Error::training("solver.loss", "non-finite loss"));
            }
            return Ok((
                ObjectiveParts {
                    total: real_loss,
                    real: real_loss,
                    replay: Vec::new(),
                },
                grads,
            ));
        }
        let mut inputs = replay[0].inputs.clone();
        let mut targets = replay[0].targets.clone();
        let mut sizes = vec![replay[0].targets.len()];
        for r in &replay[1..] {
            inputs = inputs.vstack(&r.inputs)?;
            targets.extend_from_slice(&r.targets);
            sizes.push(r.targets.len());
        }
        let (replay_losses, replay_grads) = self.mse_pass(&inputs, &targets, &sizes)?;
        let replay_mean = replay_losses.iter().sum::<f64>() / replay_losses.len() as f64;
        let total = alpha * real_loss + (1.0 - alpha) * replay_mean;
        if !total.is_finite() {
            return Err(Error::training("solver.loss", "non-finite loss"));
        }
        let beta = 1.0 - alpha;
        for ((gw, gb), (rw, rb)) in grads.layers.iter_mut().zip(&replay_grads.layers) {
            for (g, r) in gw.data_mut().iter_mut().zip(rw.data()) {
                *g = alpha * *g + beta * r;
            }
            for (g, r) in gb.iter_mut().zip(rb) {
                *g = alpha * *g + beta * r;
            }
        }
        Ok((
            ObjectiveParts {
                total,
                real: real_loss,
                replay: replay_losses,
            },
            grads,
        ))
    }

    /// Rows are split into consecutive groups of `sizes`. Returns the MSE of
    /// each group and the gradient of their unweighted mean.
    fn mse_pass(&self, inputs: &Matrix, targets: &[f64], sizes: &[usize]) -> Result<(Vec<f64>, MlpGrads)> {
        let trace = self.net.forward_trace(inputs)?;
        let pred = trace.output();
        let groups = sizes.len() as f64;
        let mut upstream = Matrix::zeros(pred.rows(), 1);
        let mut losses = Vec::with_capacity(sizes.len());
        let mut at = 0;
        for &size in sizes {
            let mut sum = 0.0;
            for r in at..at + size {
                let d = pred.get(r, 0) - targets[r];
                sum += d * d;
                upstream.set(r, 0, 2.0 * d / (size as f64 * groups));
            }
            losses.push(sum / size as f64);
            at += size;
        }
        let grads = self.net.backward(&trace, &upstream)?;
        Ok((losses, grads))
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let header = Header {
            config: self.config.clone(),
            standardizer: self.standardizer.clone(),
            tasks_seen: self.tasks_seen,
            layers: self
                .net
                .layers
                .iter()
                .map(|l| (l.in_dim(), l.out_dim(), l.activation))
                .collect(),
        };
        let header = serde_json::to_vec(&header).map_err(|e| Error::Format(e.to_string()))?;
        let mut out = frame(MAGIC, &header, 8 * self.net.param_count());
        write_f64s(&mut out, &self.net.flat_params());
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (header, payload) = split_frame(bytes, MAGIC)?;
        let header: Header =
            serde_json::from_slice(header).map_err(|e| Error::Format(e.to_string()))?;
        if header.layers.is_empty() || header.layers.last().map(|l| l.1) != Some(1) {
            return Err(Error::Format("solver must end in a scalar output".into()));
        }
        let layers = header
            .layers
            .iter()
            .map(|&(i, o, act)| DenseLayer::new(Matrix::zeros(i, o), vec![0.0; o], act))
            .collect::<Result<Vec<_>>>()?;
        let mut net = Mlp { layers };
        net.load_flat_params(&read_f64s(payload, net.param_count())?)?;
        if header.standardizer.width() != net.in_dim() {
            return Err(Error::Format("standardizer width does not match the network".into()));
        }
        Ok(Solver {
            config: header.config,
            net,
            standardizer: header.standardizer,
            tasks_seen: header.tasks_seen,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct Header {
    config: SolverConfig,
    standardizer: Standardizer,
    tasks_seen: usize,
    layers: Vec<(usize, usize, Activation)>,
}

fn gather(p: &Prepared, rows: &[usize]) -> Prepared {
    Prepared {
        inputs: p.inputs.select_rows(rows),
        targets: rows.iter().map(|&r| p.targets[r]).collect(),
    }
}

/// Slice `s` of `steps` near-equal consecutive slices of `perm`; never empty
/// while `perm` is non-empty (short sets wrap around).
fn slice_for_step(perm: &[usize], s: usize, steps: usize) -> &[usize] {
    let n = perm.len();
    if n < steps {
        let i = s % n;
        return &perm[i..i + 1];
    }
    let start = s * n / steps;
    let end = (s + 1) * n / steps;
    &perm[start..end]
}

#[cfg(test)]
mod tests;
