use std::sync::Arc;

use super::*;
use crate::tabular::{Column, Schema};

fn schema(width: usize) -> Arc<Schema> {
    Arc::new(
        Schema::with_trailing_target(
            (0..width).map(|i| Column::continuous(format!("x{i}"))).collect(),
            "y",
        )
        .unwrap(),
    )
}

fn dataset(rows: Vec<Vec<f64>>, targets: Vec<f64>) -> TabularDataset {
    let width = rows[0].len();
    let table = FeatureTable::new(schema(width), Matrix::from_rows(&rows).unwrap()).unwrap();
    TabularDataset::new(table, targets).unwrap()
}

fn linear(n: usize, rng: &mut Rng) -> TabularDataset {
    let xs: Vec<f64> = (0..n).map(|_| rng.uniform_range(0.0, 10.0)).collect();
    dataset(
        xs.iter().map(|x| vec![*x]).collect(),
        xs.iter().map(|x| 2.0 * x + 5.0).collect(),
    )
}

fn small(epochs: usize) -> SolverConfig {
    SolverConfig {
        hidden_sizes: vec![16, 8],
        epochs,
        batch_size: 32,
        ..SolverConfig::default()
    }
}

fn mse(pred: &[f64], y: &[f64]) -> f64 {
    pred.iter().zip(y).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / y.len() as f64
}

#[test]
fn untrained_zero_input_gives_output_bias() {
    let s = Solver::new(3, SolverConfig::default(), &mut Rng::new(1)).unwrap();
    let zeros = FeatureTable::new(schema(3), Matrix::zeros(2, 3)).unwrap();
    let p = s.predict(&zeros).unwrap();
    assert_eq!(p, vec![0.0, 0.0]);
    assert_eq!(p, s.predict(&zeros).unwrap());
}

#[test]
fn width_mismatch_is_rejected() {
    let s = Solver::new(3, SolverConfig::default(), &mut Rng::new(1)).unwrap();
    let t = FeatureTable::new(schema(2), Matrix::zeros(1, 2)).unwrap();
    assert!(matches!(s.predict(&t), Err(Error::Dimension(_))));
}

#[test]
fn recovers_a_linear_function() {
    let mut rng = Rng::new(21);
    let data = linear(2000, &mut rng);
    let mut s = Solver::new(1, SolverConfig::default(), &mut rng).unwrap();
    s.fit_task(&data, &[], 0.5, &mut rng).unwrap();
    let grid: Vec<Vec<f64>> = (0..=40).map(|i| vec![0.25 * i as f64]).collect();
    let truth: Vec<f64> = grid.iter().map(|x| 2.0 * x[0] + 5.0).collect();
    let table = FeatureTable::new(schema(1), Matrix::from_rows(&grid).unwrap()).unwrap();
    for (p, t) in s.predict(&table).unwrap().iter().zip(&truth) {
        assert!((p - t).abs() < 0.5, "predicted {p}, expected {t}");
    }
}

#[test]
fn first_task_sets_output_bias_and_standardizer() {
    let mut rng = Rng::new(2);
    let data = linear(100, &mut rng);
    let mut s = Solver::new(1, small(0), &mut rng).unwrap();
    s.begin_task(&data).unwrap();
    let mean = data.targets().iter().sum::<f64>() / 100.0;
    assert_eq!(s.network().layers.last().unwrap().bias[0], mean);
    assert_ne!(s.standardizer().means()[0], 0.0);
    assert_eq!(s.tasks_seen(), 1);
}

#[test]
fn alpha_one_ignores_replay() {
    let mut rng = Rng::new(3);
    let real = linear(100, &mut rng);
    let replay = linear(70, &mut rng);
    let base = Solver::new(1, small(3), &mut rng).unwrap();
    let mut a = base.clone();
    let mut b = base.clone();
    a.train_epochs(&real, &[replay], 1.0, 3, &mut Rng::new(9)).unwrap();
    b.train_epochs(&real, &[], 1.0, 3, &mut Rng::new(9)).unwrap();
    assert_eq!(a.network().flat_params(), b.network().flat_params());
}

#[test]
fn alpha_zero_ignores_real_targets() {
    let mut rng = Rng::new(4);
    let real = linear(100, &mut rng);
    let shifted = TabularDataset::new(
        real.table().clone(),
        real.targets().iter().map(|y| -3.0 * y).collect(),
    )
    .unwrap();
    let replay = linear(100, &mut rng);
    let base = Solver::new(1, small(3), &mut rng).unwrap();
    let mut a = base.clone();
    let mut b = base.clone();
    a.train_epochs(&real, &[replay.clone()], 0.0, 3, &mut Rng::new(9)).unwrap();
    b.train_epochs(&shifted, &[replay], 0.0, 3, &mut Rng::new(9)).unwrap();
    assert_eq!(a.network().flat_params(), b.network().flat_params());
}

#[test]
fn identical_replay_at_half_alpha_matches_pure_real_loss() {
    let mut rng = Rng::new(5);
    let data = linear(64, &mut rng);
    let s = Solver::new(1, small(0), &mut rng).unwrap();
    let mixed = s.objective(&data, &[data.clone()], 0.5).unwrap().total;
    let pure = s.objective(&data, &[], 1.0).unwrap().total;
    assert!((mixed - pure).abs() < 1e-10);
}

#[test]
fn objective_matches_predictions() {
    let mut rng = Rng::new(6);
    let real = linear(50, &mut rng);
    let r1 = linear(30, &mut rng);
    let r2 = linear(20, &mut rng);
    let mut s = Solver::new(1, small(2), &mut rng).unwrap();
    s.fit_task(&real, &[], 1.0, &mut rng).unwrap();
    let alpha = 0.3;
    let parts = s.objective(&real, &[r1.clone(), r2.clone()], alpha).unwrap();
    let l_real = mse(&s.predict(real.table()).unwrap(), real.targets());
    let l1 = mse(&s.predict(r1.table()).unwrap(), r1.targets());
    let l2 = mse(&s.predict(r2.table()).unwrap(), r2.targets());
    let oracle = alpha * l_real + (1.0 - alpha) * (l1 + l2) / 2.0;
    assert!((parts.total - oracle).abs() < 1e-10);
    assert!((parts.real - l_real).abs() < 1e-10);
}

#[test]
fn every_step_decomposes() {
    let mut rng = Rng::new(7);
    let real = linear(90, &mut rng);
    let replay = [linear(40, &mut rng), linear(45, &mut rng)];
    let mut s = Solver::new(1, small(2), &mut rng).unwrap();
    let report = s.fit_task(&real, &replay, 0.4, &mut rng).unwrap();
    assert_eq!(report.steps.len(), 2 * 3);
    for p in &report.steps {
        let mean = p.replay.iter().sum::<f64>() / p.replay.len() as f64;
        assert!((p.total - (0.4 * p.real + 0.6 * mean)).abs() < 1e-10);
    }
}

#[test]
fn alpha_outside_unit_interval_is_rejected() {
    let mut rng = Rng::new(8);
    let data = linear(10, &mut rng);
    let mut s = Solver::new(1, small(1), &mut rng).unwrap();
    for alpha in [-0.1, 1.5, f64::NAN] {
        assert!(matches!(
            s.train_epochs(&data, &[], alpha, 1, &mut rng),
            Err(Error::Domain(_))
        ));
    }
}

#[test]
fn training_loss_trends_down() {
    let mut rng = Rng::new(10);
    let data = linear(500, &mut rng);
    let mut s = Solver::new(1, small(30), &mut rng).unwrap();
    let losses = s.fit_task(&data, &[], 1.0, &mut rng).unwrap().epoch_losses;
    for w in losses.windows(5).step_by(5) {
        let first = w[0];
        let last = w[4];
        assert!(last <= first * 1.05, "{losses:?}");
    }
}

#[test]
fn serialization_round_trips() {
    let mut rng = Rng::new(11);
    let data = linear(40, &mut rng);
    let mut s = Solver::new(1, small(1), &mut rng).unwrap();
    s.fit_task(&data, &[], 1.0, &mut rng).unwrap();
    let bytes = s.to_bytes().unwrap();
    let back = Solver::from_bytes(&bytes).unwrap();
    assert_eq!(back, s);
    assert_eq!(back.to_bytes().unwrap(), bytes);
    assert!(Solver::from_bytes(&bytes[1..]).is_err());
}
