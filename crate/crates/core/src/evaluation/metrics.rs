use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `(100 / N)·Σ |y − ŷ| / |y|`.
pub fn mape(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    if y.len() != y_hat.len() {
        return Err(Error::Dimension(format!(
            "{} targets against {} predictions",
            y.len(),
            y_hat.len()
        )));
    }
    if y.is_empty() {
        return Err(Error::Domain("MAPE of an empty set".into()));
    }
    let mut sum = 0.0;
    for (t, p) in y.iter().zip(y_hat) {
        if t.abs() <= 1e-9 {
            return Err(Error::Domain(format!("ground truth {t} too close to zero")));
        }
        sum += (t - p).abs() / t.abs();
    }
    Ok(100.0 * sum / y.len() as f64)
}

/// `R[i][j]`: error on task `j`'s test set after training through task `i`
/// (zero-based here). Cells may be missing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultMatrix {
    tasks: usize,
    cells: Vec<Vec<Option<f64>>>,
}

impl ResultMatrix {
    pub fn new(tasks: usize) -> Self {
        ResultMatrix {
            tasks,
            cells: vec![vec![None; tasks]; tasks],
        }
    }

    /// Fully populated matrix from rows.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let tasks = rows.len();
        if rows.iter().any(|r| r.len() != tasks) {
            return Err(Error::Dimension("result matrix must be square".into()));
        }
        Ok(ResultMatrix {
            tasks,
            cells: rows
                .into_iter()
                .map(|r| r.into_iter().map(Some).collect())
                .collect(),
        })
    }

    pub fn tasks(&self) -> usize {
        self.tasks
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.cells[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Option<f64>) {
        self.cells[i][j] = value;
    }

    pub fn rows(&self) -> &[Vec<Option<f64>>] {
        &self.cells
    }

    fn require(&self, i: usize, j: usize) -> Result<f64> {
        self.cells[i][j].ok_or_else(|| Error::State(format!("result cell ({i}, {j}) is not populated")))
    }

    /// Mean of the final row.
    pub fn ave_mape(&self) -> Result<f64> {
        if self.tasks == 0 {
            return Err(Error::State("empty result matrix".into()));
        }
        let last = self.tasks - 1;
        let mut sum = 0.0;
        for j in 0..self.tasks {
            sum += self.require(last, j)?;
        }
        Ok(sum / self.tasks as f64)
    }

    /// Mean over earlier tasks of final-row error minus just-trained error.
    pub fn forgetting(&self) -> Result<f64> {
        if self.tasks < 2 {
            return Err(Error::Domain("forgetting needs at least two tasks".into()));
        }
        let last = self.tasks - 1;
        let mut sum = 0.0;
        for i in 0..last {
            sum += self.require(last, i)? - self.require(i, i)?;
        }
        Ok(sum / last as f64)
    }

    /// Mean change in a task's error `k` tasks after it was learned.
    pub fn f_k(&self, k: usize) -> Result<f64> {
        if k == 0 || k >= self.tasks {
            return Err(Error::Domain(format!(
                "k = {k} outside 1..={}",
                self.tasks.saturating_sub(1)
            )));
        }
        let terms = self.tasks - k;
        let mut sum = 0.0;
        for i in 0..terms {
            sum += self.require(i + k, i)? - self.require(i, i)?;
        }
        Ok(sum / terms as f64)
    }

    /// Fraction of populated cells.
    pub fn coverage(&self) -> f64 {
        if self.tasks == 0 {
            return 0.0;
        }
        let filled = self.cells.iter().flatten().filter(|c| c.is_some()).count();
        filled as f64 / (self.tasks * self.tasks) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub ave_mape: f64,
    /// `None` for single-task sequences.
    pub forgetting: Option<f64>,
    /// `(k, f_k)` for every `k` in `1..I`.
    pub f_k: Vec<(usize, f64)>,
}

impl Summary {
    pub fn of(r: &ResultMatrix) -> Result<Self> {
        Ok(Summary {
            ave_mape: r.ave_mape()?,
            forgetting: if r.tasks() >= 2 { Some(r.forgetting()?) } else { None },
            f_k: (1..r.tasks()).map(|k| Ok((k, r.f_k(k)?))).collect::<Result<_>>()?,
        })
    }

    pub fn f_k_at(&self, k: usize) -> Option<f64> {
        self.f_k.iter().find(|(kk, _)| *kk == k).map(|(_, v)| *v)
    }
}

/// Summary of a matrix with missing cells: each term uses only the cells
/// it needs that are present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailSummary {
    pub threshold: f64,
    pub ave_mape: Option<f64>,
    pub forgetting: Option<f64>,
    pub coverage: f64,
}

impl TailSummary {
    pub fn of(r: &ResultMatrix, threshold: f64) -> Self {
        let coverage = r.coverage();
        if coverage == 0.0 || r.tasks() == 0 {
            return TailSummary {
                threshold,
                ave_mape: None,
                forgetting: None,
                coverage,
            };
        }
        let last = r.tasks() - 1;
        let final_row: Vec<f64> = (0..r.tasks()).filter_map(|j| r.get(last, j)).collect();
        let ave = (!final_row.is_empty()).then(|| final_row.iter().sum::<f64>() / final_row.len() as f64);
        let drops: Vec<f64> = (0..last)
            .filter_map(|i| Some(r.get(last, i)? - r.get(i, i)?))
            .collect();
        let forgetting = (!drops.is_empty()).then(|| drops.iter().sum::<f64>() / drops.len() as f64);
        TailSummary {
            threshold,
            ave_mape: ave,
            forgetting,
            coverage,
        }
    }
}

/// Linear-interpolation percentile of `values` (`pct` in [0, 100]).
pub fn percentile(values: &[f64], pct: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Domain("percentile of an empty set".into()));
    }
    if !(0.0..=100.0).contains(&pct) {
        return Err(Error::Domain(format!("percentile {pct} outside [0, 100]")));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = pct / 100.0 * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Ok(v[lo] + (v[hi] - v[lo]) * (pos - lo as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mape_examples() {
        assert_eq!(mape(&[3.0, 4.0], &[3.0, 4.0]).unwrap(), 0.0);
        assert!((mape(&[10.0, 20.0], &[11.0, 18.0]).unwrap() - 10.0).abs() < 1e-12);
        assert_eq!(mape(&[5.0], &[0.0]).unwrap(), 100.0);
        assert!(matches!(mape(&[0.0], &[1.0]), Err(Error::Domain(_))));
        assert!(matches!(mape(&[1.0], &[]), Err(Error::Dimension(_))));
        assert!(mape(&[], &[]).is_err());
    }

    #[test]
    fn ave_mape_examples() {
        assert_eq!(ResultMatrix::from_rows(vec![vec![7.0]]).unwrap().ave_mape().unwrap(), 7.0);
        let r = ResultMatrix::from_rows(vec![vec![10.0, 30.0], vec![12.0, 8.0]]).unwrap();
        assert_eq!(r.ave_mape().unwrap(), 10.0);
        let c = ResultMatrix::from_rows(vec![vec![4.5; 3]; 3]).unwrap();
        assert_eq!(c.ave_mape().unwrap(), 4.5);
        assert!(matches!(ResultMatrix::new(2).ave_mape(), Err(Error::State(_))));
    }

    #[test]
    fn forgetting_examples() {
        let r = ResultMatrix::from_rows(vec![vec![10.0, 30.0], vec![12.0, 8.0]]).unwrap();
        assert_eq!(r.forgetting().unwrap(), 2.0);
        let back = ResultMatrix::from_rows(vec![vec![10.0, 30.0], vec![9.0, 8.0]]).unwrap();
        assert_eq!(back.forgetting().unwrap(), -1.0);
        let same = ResultMatrix::from_rows(vec![vec![5.0, 1.0], vec![5.0, 2.0]]).unwrap();
        assert_eq!(same.forgetting().unwrap(), 0.0);
        assert!(matches!(
            ResultMatrix::from_rows(vec![vec![1.0]]).unwrap().forgetting(),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn f_k_examples() {
        let r = ResultMatrix::from_rows(vec![
            vec![10.0, 0.0, 0.0],
            vec![12.0, 10.0, 0.0],
            vec![15.0, 14.0, 10.0],
        ])
        .unwrap();
        assert_eq!(r.f_k(1).unwrap(), 3.0);
        assert_eq!(r.f_k(2).unwrap(), 5.0);
        assert!(r.f_k(0).is_err() && r.f_k(3).is_err());
        let flat = ResultMatrix::from_rows(vec![vec![3.0, 7.0, 1.0]; 3]).unwrap();
        for k in 1..3 {
            assert_eq!(flat.f_k(k).unwrap(), 0.0);
        }
    }

    #[test]
    fn tail_summary_uses_available_cells() {
        let mut r = ResultMatrix::new(2);
        assert_eq!(
            TailSummary::of(&r, 1.0),
            TailSummary {
                threshold: 1.0,
                ave_mape: None,
                forgetting: None,
                coverage: 0.0
            }
        );
        r.set(0, 0, Some(10.0));
        r.set(1, 0, Some(14.0));
        let t = TailSummary::of(&r, 1.0);
        assert_eq!(t.ave_mape, Some(14.0));
        assert_eq!(t.forgetting, Some(4.0));
        assert_eq!(t.coverage, 0.5);
    }

    #[test]
    fn percentile_interpolates() {
        let v: Vec<f64> = (0..=10).map(f64::from).collect();
        assert_eq!(percentile(&v, 90.0).unwrap(), 9.0);
        assert_eq!(percentile(&[1.0, 2.0], 50.0).unwrap(), 1.5);
        assert!(percentile(&[], 50.0).is_err());
    }
}
