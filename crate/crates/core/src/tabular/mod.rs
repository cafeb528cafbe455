//! Mixed-type tabular data: schemas, datasets, CSV I/O and the
//! mode-specific normalization used by the tabular generator.

mod dataset;
pub mod gmm;
mod normalize;
mod schema;

pub use dataset::{load_csv, split_train_test, FeatureTable, TabularDataset};
pub use normalize::{
    argmax, fit_mode_normalizer, Block, ColumnTransform, ModeChoice, ModeNormalizer,
};
pub use schema::{Column, ColumnKind, Schema};
