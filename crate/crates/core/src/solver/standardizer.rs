use serde::{Deserialize, Serialize};

use crate::numcore::Matrix;

/// Columns whose spread is below this are passed through unscaled.
const MIN_STD: f64 = 1e-8;

/// Per-column z-scoring `(x − mean) / std`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    means: Vec<f64>,
    stds: Vec<f64>,
}

fn column_stats(x: &Matrix) -> (Vec<f64>, Vec<f64>) {
    let n = x.rows() as f64;
    let mut means = vec![0.0; x.cols()];
    for r in 0..x.rows() {
        for (m, v) in means.iter_mut().zip(x.row(r)) {
            *m += v;
        }
    }
    means.iter_mut().for_each(|m| *m /= n);
    let mut vars = vec![0.0; x.cols()];
    for r in 0..x.rows() {
        for ((s, v), m) in vars.iter_mut().zip(x.row(r)).zip(&means) {
            *s += (v - m) * (v - m);
        }
    }
    vars.iter_mut().for_each(|s| *s /= n);
    (means, vars)
}

fn spread(var: f64) -> f64 {
    let s = var.sqrt();
    if s < MIN_STD {
        1.0
    } else {
        s
    }
}

impl Standardizer {
    pub fn identity(width: usize) -> Self {
        Standardizer {
            means: vec![0.0; width],
            stds: vec![1.0; width],
        }
    }

    pub fn fit(x: &Matrix) -> Self {
        let (means, vars) = column_stats(x);
        Standardizer {
            means,
            stds: vars.into_iter().map(spread).collect(),
        }
    }

    /// `stat ← decay·stat + (1 − decay)·stat(x)` for means and variances.
    pub fn blend(&mut self, x: &Matrix, decay: f64) {
        let (means, vars) = column_stats(x);
        for c in 0..self.means.len() {
            let var = self.stds[c] * self.stds[c];
            self.means[c] = decay * self.means[c] + (1.0 - decay) * means[c];
            self.stds[c] = spread(decay * var + (1.0 - decay) * vars[c]);
        }
    }

    pub fn width(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn stds(&self) -> &[f64] {
        &self.stds
    }

    pub fn apply(&self, x: &Matrix) -> Matrix {
        let mut out = x.clone();
        let w = self.width();
        for row in out.data_mut().chunks_exact_mut(w) {
            for ((v, m), s) in row.iter_mut().zip(&self.means).zip(&self.stds) {
                *v = (*v - m) / s;
            }
        }
        out
    }
}
