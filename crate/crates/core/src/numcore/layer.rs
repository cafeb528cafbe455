//! Dense layers and fixed-architecture stacks with hand-derived gradients.

use serde::{Deserialize, Serialize};

use super::adam::ParamSlot;
use super::matrix::Matrix;
use super::rng::Rng;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Relu,
    Identity,
    Tanh,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Identity => z,
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the activation's output.
    #[inline]
    pub fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
            Activation::Tanh => 1.0 - y * y,
        }
    }
}

/// `activation(x·W + b)` with `W` stored `in × out`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

#[derive(Debug, Clone)]
pub struct LayerGrads {
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub input: Matrix,
}

impl DenseLayer {
    /// Glorot-uniform weights, zero bias.
    pub fn init(in_dim: usize, out_dim: usize, activation: Activation, rng: &mut Rng) -> Self {
        let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let data = (0..in_dim * out_dim)
            .map(|_| rng.uniform_range(-limit, limit))
            .collect();
        DenseLayer {
            weights: Matrix::from_vec(in_dim, out_dim, data).expect("sized buffer"),
            bias: vec![0.0; out_dim],
            activation,
        }
    }

    pub fn new(weights: Matrix, bias: Vec<f64>, activation: Activation) -> Result<Self> {
        if weights.cols() != bias.len() {
            return Err(Error::Dimension(format!(
                "bias length {} does not match {} outputs",
                bias.len(),
                weights.cols()
            )));
        }
        Ok(DenseLayer {
            weights,
            bias,
            activation,
        })
    }

    #[inline]
    pub fn in_dim(&self) -> usize {
        self.weights.rows()
    }

    #[inline]
    pub fn out_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn param_count(&self) -> usize {
        self.weights.data().len() + self.bias.len()
    }

    pub fn forward(&self, input: &Matrix) -> Result<Matrix> {
        if input.cols() != self.in_dim() {
            return Err(Error::Dimension(format!(
                "layer expects {} inputs, got {}",
                self.in_dim(),
                input.cols()
            )));
        }
        let mut z = input.matmul(&self.weights)?;
        z.add_row_vector(&self.bias)?;
        if self.activation != Activation::Identity {
            let act = self.activation;
            z.map_inplace(|v| act.apply(v));
        }
        Ok(z)
    }

    /// Gradients given the layer input and the gradient of the loss with
    /// respect to the layer output.
    pub fn backward(&self, input: &Matrix, upstream: &Matrix) -> Result<LayerGrads> {
        let output = self.forward(input)?;
        self.backward_cached(input, &output, upstream)
    }

    /// As [`DenseLayer::backward`], reusing an output from a prior forward pass.
    pub fn backward_cached(
        &self,
        input: &Matrix,
        output: &Matrix,
        upstream: &Matrix,
    ) -> Result<LayerGrads> {
        if upstream.shape() != output.shape() || input.rows() != output.rows() {
            return Err(Error::Dimension(format!(
                "upstream gradient {:?} does not match output {:?}",
                upstream.shape(),
                output.shape()
            )));
        }
        let delta = match self.activation {
            Activation::Identity => upstream.clone(),
            act => {
                let mut d = upstream.clone();
                for (g, y) in d.data_mut().iter_mut().zip(output.data()) {
                    *g *= act.derivative_from_output(*y);
                }
                d
            }
        };
        Ok(LayerGrads {
            weights: input.t_matmul(&delta)?,
            bias: delta.sum_rows(),
            input: delta.matmul_t(&self.weights)?,
        })
    }
}

/// A feed-forward stack of dense layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<DenseLayer>,
}

/// Activations recorded by [`Mlp::forward_trace`]: `values[0]` is the input,
/// `values[l + 1]` the output of layer `l`.
#[derive(Debug, Clone)]
pub struct Trace {
    pub values: Vec<Matrix>,
}

impl Trace {
    pub fn output(&self) -> &Matrix {
        self.values.last().expect("trace holds at least the input")
    }
}

#[derive(Debug, Clone)]
pub struct MlpGrads {
    pub layers: Vec<(Matrix, Vec<f64>)>,
    pub input: Matrix,
}

impl Mlp {
    /// Layer sizes `dims[0] → dims[1] → …`; hidden layers use `hidden`,
    /// the last layer uses `output`.
    pub fn init(dims: &[usize], hidden: Activation, output: Activation, rng: &mut Rng) -> Self {
        assert!(dims.len() >= 2, "an MLP needs input and output sizes");
        let n = dims.len() - 1;
        let layers = (0..n)
            .map(|i| {
                let act = if i + 1 == n { output } else { hidden };
                DenseLayer::init(dims[i], dims[i + 1], act, rng)
            })
            .collect();
        Mlp { layers }
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.layers.last().map_or(0, DenseLayer::out_dim)
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(DenseLayer::param_count).sum()
    }

    pub fn forward(&self, input: &Matrix) -> Result<Matrix> {
        let mut x = self.layers[0].forward(input)?;
        for layer in &self.layers[1..] {
            x = layer.forward(&x)?;
        }
        Ok(x)
    }

    pub fn forward_trace(&self, input: &Matrix) -> Result<Trace> {
        let mut values = Vec::with_capacity(self.layers.len() + 1);
        values.push(input.clone());
        for layer in &self.layers {
            let next = layer.forward(values.last().expect("non-empty"))?;
            values.push(next);
        }
        Ok(Trace { values })
    }

    pub fn backward(&self, trace: &Trace, upstream: &Matrix) -> Result<MlpGrads> {
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut g = upstream.clone();
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let lg = layer.backward_cached(&trace.values[l], &trace.values[l + 1], &g)?;
            grads.push((lg.weights, lg.bias));
            g = lg.input;
        }
        grads.reverse();
        Ok(MlpGrads {
            layers: grads,
            input: g,
        })
    }

    /// Optimizer slots, two per layer (weights then bias), in layer order.
    pub fn slots<'a>(&'a mut self, grads: &'a MlpGrads, prefix: &str) -> Vec<ParamSlot<'a>> {
        let mut out = Vec::with_capacity(2 * self.layers.len());
        for (l, (layer, (gw, gb))) in self.layers.iter_mut().zip(&grads.layers).enumerate() {
            out.push(ParamSlot {
                name: format!("{prefix}.layer{l}.weights"),
                values: layer.weights.data_mut(),
                grads: gw.data(),
            });
            out.push(ParamSlot {
                name: format!("{prefix}.layer{l}.bias"),
                values: &mut layer.bias,
                grads: gb,
            });
        }
        out
    }

    /// All parameters flattened in slot order.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for layer in &self.layers {
            out.extend_from_slice(layer.weights.data());
            out.extend_from_slice(&layer.bias);
        }
        out
    }

    /// Overwrites parameters from a buffer produced by [`Mlp::flat_params`].
    pub fn load_flat_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::Dimension(format!(
                "parameter buffer of {} for a network with {}",
                flat.len(),
                self.param_count()
            )));
        }
        let mut at = 0;
        for layer in &mut self.layers {
            let nw = layer.weights.data().len();
            layer.weights.data_mut().copy_from_slice(&flat[at..at + nw]);
            at += nw;
            let nb = layer.bias.len();
            layer.bias.copy_from_slice(&flat[at..at + nb]);
            at += nb;
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.is_finite() && l.bias.iter().all(|b| b.is_finite()))
    }
}
