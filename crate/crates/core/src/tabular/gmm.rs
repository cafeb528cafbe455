//! One-dimensional Gaussian mixtures fitted by expectation maximisation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numcore::Rng;

/// Standard deviation assigned to degenerate (constant) columns; also the
/// floor for every fitted component.
pub const MIN_STD: f64 = 1e-4;
/// Components lighter than this are dropped after fitting.
pub const PRUNE_WEIGHT: f64 = 0.005;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub mean: f64,
    pub std: f64,
    pub weight: f64,
}

impl Mode {
    #[inline]
    pub fn log_density(&self, x: f64) -> f64 {
        let z = (x - self.mean) / self.std;
        -0.5 * z * z - self.std.ln() - LN_SQRT_2PI
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GmmOptions {
    pub max_modes: usize,
    pub max_iter: usize,
    /// Convergence threshold on the change of mean log-likelihood per sample.
    pub tol: f64,
}

impl Default for GmmOptions {
    fn default() -> Self {
        GmmOptions {
            max_modes: 10,
            max_iter: 100,
            tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GmmFit {
    /// Retained components, weights summing to one.
    pub modes: Vec<Mode>,
    /// Mean log-likelihood per sample after each EM iteration.
    pub log_likelihood: Vec<f64>,
}

/// `log Σ_k π_k N(x | μ_k, σ_k)`
pub fn mixture_log_density(modes: &[Mode], x: f64) -> f64 {
    log_sum_exp(modes.iter().map(|m| m.weight.ln() + m.log_density(x)))
}

fn log_sum_exp(it: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = it.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + it.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Posterior component probabilities for `x`.
pub fn responsibilities(modes: &[Mode], x: f64, out: &mut Vec<f64>) {
    out.clear();
    let max = modes
        .iter()
        .map(|m| m.weight.ln() + m.log_density(x))
        .fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for m in modes {
        let v = (m.weight.ln() + m.log_density(x) - max).exp();
        total += v;
        out.push(v);
    }
    for v in out.iter_mut() {
        *v /= total;
    }
}

/// The component count is chosen by BIC over `1..=max_modes`, stopping
/// after two consecutive non-improving counts.
pub fn fit_gmm(values: &[f64], opts: GmmOptions, rng: &mut Rng) -> Result<GmmFit> {
    if values.is_empty() {
        return Err(Error::Domain("cannot fit a mixture to an empty column".into()));
    }
    if opts.max_modes == 0 {
        return Err(Error::Domain("max_modes must be at least 1".into()));
    }
    let n = values.len();
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if hi - lo <= MIN_STD * 1e-3 {
        let mean = values.iter().sum::<f64>() / n as f64;
        return Ok(GmmFit {
            modes: vec![Mode {
                mean,
                std: MIN_STD,
                weight: 1.0,
            }],
            log_likelihood: Vec::new(),
        });
    }

    let mut distinct: Vec<f64> = values.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let k_max = opts.max_modes.min(distinct.len());

    let mut best: Option<(f64, Vec<Mode>, Vec<f64>)> = None;
    let mut worse_in_a_row = 0;
    for k in 1..=k_max {
        let (modes, trace) = run_em(values, k, opts, rng);
        let ll = *trace.last().expect("at least one EM iteration");
        let free = (3 * modes.len()).saturating_sub(1) as f64;
        let bic = -2.0 * n as f64 * ll + free * (n as f64).ln();
        if best.as_ref().is_none_or(|(b, _, _)| bic < *b) {
            best = Some((bic, modes, trace));
            worse_in_a_row = 0;
        } else {
            worse_in_a_row += 1;
            if worse_in_a_row == 2 {
                break;
            }
        }
    }
    let (_, mut modes, trace) = best.expect("k_max >= 1");
    modes.retain(|m| m.weight >= PRUNE_WEIGHT);
    modes.sort_by(|a, b| a.mean.total_cmp(&b.mean));
    if modes.is_empty() {
        return Err(Error::training("gmm", "every mixture component was pruned"));
    }
    let total: f64 = modes.iter().map(|m| m.weight).sum();
    for m in &mut modes {
        m.weight /= total;
    }
    Ok(GmmFit {
        modes,
        log_likelihood: trace,
    })
}

/// EM with `k` components from a k-means++ start. Returns the components
/// (zero-weight ones dropped) and the per-iteration mean log-likelihood.
fn run_em(values: &[f64], k: usize, opts: GmmOptions, rng: &mut Rng) -> (Vec<Mode>, Vec<f64>) {
    let n = values.len();
    let mut modes = kmeans_pp_init(values, k, rng);
    let mut resp = vec![0.0; n * k];
    let mut trace = Vec::with_capacity(opts.max_iter);
    let mut log_w = vec![0.0; k];
    for _ in 0..opts.max_iter {
        // E step
        for (lw, m) in log_w.iter_mut().zip(&modes) {
            *lw = if m.weight > 0.0 { m.weight.ln() } else { f64::NEG_INFINITY };
        }
        let mut ll = 0.0;
        for (i, &x) in values.iter().enumerate() {
            let row = &mut resp[i * k..(i + 1) * k];
            let mut max = f64::NEG_INFINITY;
            for ((r, m), lw) in row.iter_mut().zip(&modes).zip(&log_w) {
                *r = if *lw == f64::NEG_INFINITY {
                    f64::NEG_INFINITY
                } else {
                    lw + m.log_density(x)
                };
                max = max.max(*r);
            }
            let mut total = 0.0;
            for r in row.iter_mut() {
                *r = (*r - max).exp();
                total += *r;
            }
            for r in row.iter_mut() {
                *r /= total;
            }
            ll += max + total.ln();
        }
        let ll = ll / n as f64;
        let converged = trace
            .last()
            .is_some_and(|prev: &f64| (ll - prev).abs() < opts.tol);
        trace.push(ll);
        if converged {
            break;
        }

        // M step
        for (j, m) in modes.iter_mut().enumerate() {
            let mut nk = 0.0;
            let mut sx = 0.0;
            for (i, &x) in values.iter().enumerate() {
                let r = resp[i * k + j];
                nk += r;
                sx += r * x;
            }
            if nk < 1e-10 {
                m.weight = 0.0;
                continue;
            }
            let mean = sx / nk;
            let mut sv = 0.0;
            for (i, &x) in values.iter().enumerate() {
                let d = x - mean;
                sv += resp[i * k + j] * d * d;
            }
            m.mean = mean;
            m.std = (sv / nk).sqrt().max(MIN_STD);
            m.weight = nk / n as f64;
        }
    }

    modes.retain(|m| m.weight > 0.0);
    (modes, trace)
}

/// k-means++ seeding followed by a hard assignment to obtain initial
/// weights and spreads.
fn kmeans_pp_init(values: &[f64], k: usize, rng: &mut Rng) -> Vec<Mode> {
    let n = values.len();
    let mut centers = vec![values[rng.below(n)]];
    let mut d2: Vec<f64> = values.iter().map(|v| (v - centers[0]).powi(2)).collect();
    while centers.len() < k {
        let next = values[rng.categorical(&d2)];
        centers.push(next);
        for (d, v) in d2.iter_mut().zip(values) {
            *d = d.min((v - next).powi(2));
        }
    }
    let mut count = vec![0usize; k];
    let mut sum = vec![0.0; k];
    let mut sq = vec![0.0; k];
    for &v in values {
        let j = nearest(&centers, v);
        count[j] += 1;
        sum[j] += v;
        sq[j] += v * v;
    }
    let global_std = {
        let mean = values.iter().sum::<f64>() / n as f64;
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt()
    };
    (0..k)
        .map(|j| {
            if count[j] == 0 {
                Mode {
                    mean: centers[j],
                    std: global_std.max(MIN_STD),
                    weight: 1.0 / n as f64,
                }
            } else {
                let c = count[j] as f64;
                let mean = sum[j] / c;
                let var = (sq[j] / c - mean * mean).max(0.0);
                Mode {
                    mean,
                    std: var.sqrt().max(global_std * 0.05).max(MIN_STD),
                    weight: c / n as f64,
                }
            }
        })
        .collect()
}

fn nearest(centers: &[f64], v: f64) -> usize {
    let mut best = 0;
    let mut bd = f64::INFINITY;
    for (j, c) in centers.iter().enumerate() {
        let d = (v - c).abs();
        if d < bd {
            bd = d;
            best = j;
        }
    }
    best
}
