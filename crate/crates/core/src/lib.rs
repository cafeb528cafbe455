//! Continual learning for tabular regression with multi-generator generative
//! replay.
//!
//! The crate is organised bottom-up:
//!
//! - [`numcore`]: matrices, dense layers with analytic gradients, Adam, seeded RNG.
//! - [`tabular`]: schemas, datasets, CSV ingestion and mode-specific normalization.
//! - [`generators`]: a plain VAE and a tabular VAE behind one generator type.
//! - [`solver`]: the MLP delay regressor trained on mixed real/replay batches.
//! - [`replay`]: configuration vectors, generator selection and the scholar.
//! - [`scenario`]: task sequences and the synthetic one-way-delay data source.
//! - [`evaluation`]: result matrices, forgetting metrics, baselines and reports.

pub mod error;
pub mod evaluation;
pub mod generators;
pub mod numcore;
pub mod replay;
pub mod scenario;
pub mod solver;
pub mod tabular;

pub use error::{Error, Result};
