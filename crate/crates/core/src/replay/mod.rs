//! Generative replay with several generators: replay generation and
//! labeling, the mixed solver objective, relevance-based target selection
//! and target-only generator updates.

mod scholar;
mod selector;

pub use scholar::{single_generator_loss, ReplaySet, Scholar, TaskOutcome};
pub use selector::{relevance, replay_counts, select_target, ConfigVector, ReplayPolicy, VectorRole};
