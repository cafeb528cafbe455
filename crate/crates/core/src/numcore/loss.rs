use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Mean squared error over all entries and its gradient with respect to `pred`.
pub fn mse_loss(pred: &Matrix, target: &Matrix) -> Result<(f64, Matrix)> {
    if pred.shape() != target.shape() {
        return Err(Error::Dimension(format!(
            "prediction {:?} vs target {:?}",
            pred.shape(),
            target.shape()
        )));
    }
    let n = pred.data().len();
    if n == 0 {
        return Err(Error::Domain("mean squared error of an empty batch".into()));
    }
    let scale = 2.0 / n as f64;
    let mut grad = Matrix::zeros(pred.rows(), pred.cols());
    let mut sum = 0.0;
    for ((g, p), t) in grad.data_mut().iter_mut().zip(pred.data()).zip(target.data()) {
        let d = p - t;
        sum += d * d;
        *g = scale * d;
    }
    Ok((sum / n as f64, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_inputs_have_zero_loss() {
        let p = Matrix::from_vec(2, 1, vec![1.5, -2.0]).unwrap();
        let (l, g) = mse_loss(&p, &p).unwrap();
        assert_eq!(l, 0.0);
        assert!(g.data().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn hand_evaluated_example() {
        let p = Matrix::from_vec(2, 1, vec![2.0, 4.0]).unwrap();
        let t = Matrix::zeros(2, 1);
        let (l, g) = mse_loss(&p, &t).unwrap();
        assert_eq!(l, 10.0);
        assert_eq!(g.data(), &[2.0, 4.0]);
    }

    #[test]
    fn empty_and_mismatched_inputs_fail() {
        let e = Matrix::zeros(0, 1);
        assert!(matches!(mse_loss(&e, &e), Err(Error::Domain(_))));
        assert!(matches!(
            mse_loss(&Matrix::zeros(1, 2), &Matrix::zeros(2, 1)),
            Err(Error::Dimension(_))
        ));
    }
}
