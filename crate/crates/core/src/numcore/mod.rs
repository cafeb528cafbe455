//! Deterministic numeric core: matrices, dense layers, Adam, losses and the
//! seeded random source.

mod adam;
mod layer;
mod loss;
mod matrix;
mod rng;

pub use adam::{AdamState, ParamSlot};
pub use layer::{Activation, DenseLayer, LayerGrads, Mlp, MlpGrads, Trace};
pub use loss::mse_loss;
pub use matrix::Matrix;
pub use rng::{derive_seed, label, Rng};
