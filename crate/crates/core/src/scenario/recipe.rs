//! Synthetic one-way-delay data. Every constant of the generative recipe
//! lives in [`RECIPE`].
//!
//! Per row: load `ℓ` is drawn uniformly from the task's load levels, a
//! trajectory phase `t ~ U(0, 1)` gives the channel quality `q = q_P(t)`,
//! and with `u = ℓ / 60`
//!
//! ```text
//! x_j = L_j·u + Q_j·q + c_j(ue)·(1 + M_j·u) + N(0, σ²)
//! owd = base(ue) + a₁·ℓ / (q + 0.1) + N(0, σ²) + spike
//! ```
//!
//! where `spike ~ LogNormal(μ_s, σ_s)` with probability `p₀ + p₁·u`, else 0.

use std::sync::Arc;

use super::{Pattern, UeType};
use crate::error::{Error, Result};
use crate::numcore::{Matrix, Rng};
use crate::tabular::{Column, FeatureTable, Schema, TabularDataset};

pub const FEATURES: usize = 16;

/// Uplink load levels in Mbps; the discrete column holds their index.
pub const LOAD_LEVELS: [f64; 7] = [0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0];

pub struct Recipe {
    pub noise_std: f64,
    pub load_scale: f64,
    pub load_weights: [f64; FEATURES],
    pub quality_weights: [f64; FEATURES],
    pub mixing: [f64; FEATURES],
    /// Per-device offset vectors, indexed by `UeType::index`.
    pub device: [[f64; FEATURES]; 3],
    /// Base delay in ms per device type.
    pub base_ms: [f64; 3],
    pub load_gain: f64,
    pub quality_floor: f64,
    pub spike_rate: f64,
    pub spike_rate_per_load: f64,
    pub spike_mu: f64,
    pub spike_sigma: f64,
    /// Channel quality at stationary positions 1, 2, 3.
    pub positions: [f64; 3],
    /// Quality on each quarter of the rectangular route.
    pub rectangle: [f64; 4],
    /// Full swings of the zigzag route.
    pub zigzag_periods: f64,
}

pub const RECIPE: Recipe = Recipe {
    noise_std: 0.05,
    load_scale: 60.0,
    load_weights: [
        0.8, -0.5, 0.3, 0.0, 1.2, -0.9, 0.4, 0.6, -0.2, 0.7, 0.0, -0.6, 0.9, 0.1, -0.4, 0.5,
    ],
    quality_weights: [
        1.0, 0.6, -0.8, 1.4, 0.0, 0.5, -1.1, 0.3, 0.9, -0.4, 1.2, 0.2, -0.7, 0.8, 0.0, -1.0,
    ],
    mixing: [
        0.2, 0.0, 0.4, -0.3, 0.1, 0.5, 0.0, -0.2, 0.3, 0.1, -0.4, 0.2, 0.0, 0.3, -0.1, 0.2,
    ],
    device: [
        [0.0, 0.5, -0.3, 0.2, 0.8, -0.6, 0.1, 0.4, -0.2, 0.7, 0.3, -0.5, 0.6, 0.0, -0.4, 0.2],
        [0.9, -0.4, 0.6, -0.7, 0.2, 0.5, -0.8, 0.0, 0.7, -0.3, -0.6, 0.4, -0.2, 0.8, 0.5, -0.9],
        [-0.7, 1.0, 0.2, 0.9, -0.5, -0.1, 0.7, -0.9, 0.1, 0.4, 0.8, -0.8, 0.3, -0.6, 0.9, 0.6],
    ],
    base_ms: [4.0, 7.0, 11.0],
    load_gain: 0.05,
    quality_floor: 0.1,
    spike_rate: 0.02,
    spike_rate_per_load: 0.03,
    spike_mu: 2.0,
    spike_sigma: 0.8,
    positions: [0.9, 0.6, 0.3],
    rectangle: [0.8, 0.5, 0.35, 0.65],
    zigzag_periods: 3.0,
};

/// Channel quality of `pattern` at trajectory phase `t ∈ [0, 1)`.
pub fn channel_quality(pattern: Pattern, t: f64) -> f64 {
    let [p1, p2, p3] = RECIPE.positions;
    match pattern {
        Pattern::P1 => p1,
        Pattern::P2 => p2,
        Pattern::P3 => p3,
        Pattern::P4 => RECIPE.rectangle[((t * 4.0) as usize).min(3)],
        Pattern::P5 => {
            let phase = (t * RECIPE.zigzag_periods).fract();
            let tri = 1.0 - (2.0 * phase - 1.0).abs();
            p1 + (p3 - p1) * tri
        }
        Pattern::P6 => {
            let s = t * 3.0;
            let (a, b, f) = if s < 1.0 {
                (p1, p2, s)
            } else if s < 2.0 {
                (p2, p3, s - 1.0)
            } else {
                (p3, p1, s - 2.0)
            };
            a + (b - a) * f
        }
    }
}

/// Delay without noise or spikes.
pub fn mean_owd(ue: UeType, load: f64, quality: f64) -> f64 {
    RECIPE.base_ms[ue.index()] + RECIPE.load_gain * load / (quality + RECIPE.quality_floor)
}

pub fn spike_probability(load: f64) -> f64 {
    RECIPE.spike_rate + RECIPE.spike_rate_per_load * load / RECIPE.load_scale
}

/// Feature columns: `ul_load` (discrete, Mbps labels) then `f01`..`f16`;
/// target `owd_ms`.
pub fn owd_schema() -> Arc<Schema> {
    let mut features = vec![Column::discrete(
        "ul_load",
        LOAD_LEVELS.iter().map(|l| format!("{l}")).collect(),
    )];
    features.extend((1..=FEATURES).map(|j| Column::continuous(format!("f{j:02}"))));
    Arc::new(Schema::with_trailing_target(features, "owd_ms").expect("static schema is valid"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthesisOptions {
    pub spikes: bool,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions { spikes: true }
    }
}

/// `n` rows for one (device, pattern) condition with loads drawn uniformly
/// from `loads` (indices into [`LOAD_LEVELS`]).
pub fn synthesize_task_data(
    ue: UeType,
    pattern: Pattern,
    loads: &[usize],
    n: usize,
    seed: u64,
) -> Result<TabularDataset> {
    synthesize_with(ue, pattern, loads, n, seed, SynthesisOptions::default())
}

pub fn synthesize_with(
    ue: UeType,
    pattern: Pattern,
    loads: &[usize],
    n: usize,
    seed: u64,
    options: SynthesisOptions,
) -> Result<TabularDataset> {
    if n == 0 {
        return Err(Error::Domain("a task needs at least one row".into()));
    }
    if loads.is_empty() {
        return Err(Error::Domain("a task needs at least one load level".into()));
    }
    if let Some(bad) = loads.iter().find(|l| **l >= LOAD_LEVELS.len()) {
        return Err(Error::Domain(format!("load index {bad} outside 0..{}", LOAD_LEVELS.len())));
    }
    let mut rng = Rng::new(seed);
    let c = &RECIPE.device[ue.index()];
    let width = FEATURES + 1;
    let mut data = Vec::with_capacity(n * width);
    let mut owd = Vec::with_capacity(n);
    for _ in 0..n {
        let level = loads[rng.below(loads.len())];
        let load = LOAD_LEVELS[level];
        let u = load / RECIPE.load_scale;
        let q = channel_quality(pattern, rng.uniform());
        data.push(level as f64);
        for j in 0..FEATURES {
            let x = RECIPE.load_weights[j] * u
                + RECIPE.quality_weights[j] * q
                + c[j] * (1.0 + RECIPE.mixing[j] * u)
                + RECIPE.noise_std * rng.normal();
            data.push(x);
        }
        let mut y = mean_owd(ue, load, q) + RECIPE.noise_std * rng.normal();
        let spike = rng.bernoulli(spike_probability(load));
        let size = rng.lognormal(RECIPE.spike_mu, RECIPE.spike_sigma);
        if options.spikes && spike {
            y += size;
        }
        owd.push(y);
    }
    let table = FeatureTable::new(owd_schema(), Matrix::from_vec(n, width, data)?)?;
    TabularDataset::new(table, owd)
}
