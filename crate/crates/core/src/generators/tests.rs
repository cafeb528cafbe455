use std::sync::Arc;

use super::*;
use crate::error::Error;
use crate::numcore::{Matrix, Mlp, Rng};
use crate::tabular::{Column, ColumnTransform, FeatureTable, ModeNormalizer, Schema};

fn schema_1d() -> Arc<Schema> {
    Arc::new(Schema::with_trailing_target(vec![Column::continuous("x")], "y").unwrap())
}

fn table(values: Vec<f64>) -> FeatureTable {
    let n = values.len();
    FeatureTable::new(schema_1d(), Matrix::from_vec(n, 1, values).unwrap()).unwrap()
}

fn config(kind: GeneratorKind, epochs: usize) -> GeneratorConfig {
    GeneratorConfig {
        epochs,
        ..GeneratorConfig::new(kind)
    }
}

fn moments(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (m, (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt())
}

#[test]
fn gaussian_moments_are_recovered() {
    let mut rng = Rng::new(11);
    let data = (0..2000).map(|_| 10.0 + 2.0 * rng.normal()).collect();
    for kind in [GeneratorKind::Tvae, GeneratorKind::Vae] {
        let mut g = Generator::new(config(kind, 60)).unwrap();
        g.fit(&table(Vec::clone(&data)), &mut rng).unwrap();
        let s = g.sample(2000, &mut rng).unwrap();
        let (m, sd) = moments(&s.features().column(0));
        assert!((m - 10.0).abs() < 0.5, "{kind:?} mean {m}");
        // The VAE returns decoder means, which shrinks the spread.
        if kind == GeneratorKind::Tvae {
            assert!((sd - 2.0).abs() < 0.5, "std {sd}");
        } else {
            assert!(sd > 0.5 && sd < 2.0, "vae std {sd}");
        }
    }
}

#[test]
fn tvae_keeps_both_clusters() {
    let mut rng = Rng::new(5);
    let data = (0..2000)
        .map(|i| if i % 2 == 0 { 0.0 } else { 100.0 } + rng.normal())
        .collect();
    let mut g = Generator::new(config(GeneratorKind::Tvae, 60)).unwrap();
    g.fit(&table(data), &mut rng).unwrap();
    let s = g.sample(2000, &mut rng).unwrap();
    let high = s.features().column(0).iter().filter(|v| **v > 50.0).count();
    assert!(high >= 500 && high <= 1500, "high cluster {high}");
}

#[test]
fn repeated_row_concentrates_samples() {
    let mut rng = Rng::new(3);
    let schema = Arc::new(
        Schema::with_trailing_target(
            vec![
                Column::continuous("a"),
                Column::discrete("b", vec!["p".into(), "q".into()]),
                Column::continuous("c"),
            ],
            "y",
        )
        .unwrap(),
    );
    let rows = Matrix::from_vec(200, 3, [4.0, 1.0, -7.5].repeat(200)).unwrap();
    let t = FeatureTable::new(schema, rows).unwrap();
    for kind in [GeneratorKind::Tvae, GeneratorKind::Vae] {
        let mut g = Generator::new(config(kind, 10)).unwrap();
        g.fit(&t, &mut rng).unwrap();
        let s = g.sample(300, &mut rng).unwrap();
        for (c, want) in [(0, 4.0), (2, -7.5)] {
            let col = s.features().column(c);
            let mad = col.iter().map(|v| (v - want).abs()).sum::<f64>() / col.len() as f64;
            assert!(mad < 0.5, "{kind:?} column {c} deviates by {mad}");
        }
        assert!(s.features().column(1).iter().all(|v| *v == 0.0 || *v == 1.0));
    }
}

#[test]
fn sampling_contract() {
    let mut rng = Rng::new(1);
    let g = Generator::new(config(GeneratorKind::Tvae, 1)).unwrap();
    assert!(matches!(g.sample(5, &mut rng), Err(Error::State(_))));
    let mut g = g;
    g.fit(&table((0..50).map(f64::from).collect()), &mut rng).unwrap();
    assert!(matches!(g.sample(0, &mut rng), Err(Error::Domain(_))));
    let a = g.sample(40, &mut Rng::new(9)).unwrap();
    let b = g.sample(40, &mut Rng::new(9)).unwrap();
    assert_eq!(a, b);
    let err = Generator::new(config(GeneratorKind::Vae, 1))
        .unwrap()
        .fit(&table(Vec::new()), &mut rng);
    assert!(matches!(err, Err(Error::Domain(_))));
}

#[test]
fn invalid_configs_are_rejected() {
    let mut c = GeneratorConfig::new(GeneratorKind::Vae);
    c.latent_dim = 0;
    assert!(Generator::new(c).is_err());
    let mut c = GeneratorConfig::new(GeneratorKind::Vae);
    c.hidden_sizes.clear();
    assert!(Generator::new(c).is_err());
}

fn probe(latent: usize, width_modes: usize, rng: &mut Rng, kind: GeneratorKind) -> Generator {
    let cfg = GeneratorConfig {
        latent_dim: latent,
        hidden_sizes: vec![5],
        ..GeneratorConfig::new(kind)
    };
    let codec = match kind {
        GeneratorKind::Tvae => Codec::Tvae(ModeNormalizer::from_columns(vec![ColumnTransform::Continuous {
            modes: (0..width_modes)
                .map(|k| crate::tabular::gmm::Mode {
                    mean: k as f64,
                    std: 1.0,
                    weight: 1.0 / width_modes as f64,
                })
                .collect(),
        }])),
        GeneratorKind::Vae => Codec::Vae(ZScoreCodec {
            means: vec![0.0; width_modes + 1],
            stds: vec![1.0; width_modes + 1],
            mins: vec![-1.0; width_modes + 1],
            maxs: vec![1.0; width_modes + 1],
            categories: vec![None; width_modes + 1],
        }),
    };
    let w = codec.width();
    let schema = match kind {
        GeneratorKind::Tvae => schema_1d(),
        GeneratorKind::Vae => Arc::new(
            Schema::with_trailing_target(
                (0..w).map(|i| Column::continuous(format!("x{i}"))).collect(),
                "y",
            )
            .unwrap(),
        ),
    };
    let act = crate::numcore::Activation::Relu;
    let id = crate::numcore::Activation::Identity;
    let enc = Mlp::init(&[w, 5, 2 * latent], act, id, rng);
    let dec = Mlp::init(&[latent, 5, w], act, id, rng);
    Generator::from_parts(cfg, schema, codec, enc, dec, true).unwrap()
}

#[test]
fn kl_closed_form_examples() {
    let mut rng = Rng::new(2);
    let mut g = probe(1, 2, &mut rng, GeneratorKind::Tvae);
    let x = Matrix::from_rows(&[vec![0.3, 1.0, 0.0]]).unwrap();
    let eps = Matrix::zeros(1, 1);
    for (mu, expect) in [(0.0, 0.0), (1.0, 0.5)] {
        let (enc, _) = g.networks_mut().unwrap();
        let last = enc.layers.last_mut().unwrap();
        last.weights.map_inplace(|_| 0.0);
        last.bias = vec![mu, 0.0];
        let (parts, _) = g.elbo_with_noise(&x, &eps).unwrap();
        assert!((parts.kl - expect).abs() < 1e-15, "mu {mu}: kl {}", parts.kl);
    }
}

fn check_fd(kind: GeneratorKind, seed: u64) {
    let mut rng = Rng::new(seed);
    let mut g = probe(2, 3, &mut rng, kind);
    let n = 3;
    let w = g.codec().unwrap().width();
    let mut rows = Vec::new();
    for _ in 0..n {
        let mut r = vec![0.0; w];
        r[0] = rng.uniform_range(-0.9, 0.9);
        match kind {
            GeneratorKind::Tvae => r[1 + rng.below(w - 1)] = 1.0,
            GeneratorKind::Vae => r.iter_mut().for_each(|v| *v = rng.normal()),
        }
        rows.push(r);
    }
    let x = Matrix::from_rows(&rows).unwrap();
    let eps = crate::generators::model::standard_normal(n, 2, &mut rng);
    let (_, grads) = g.elbo_with_noise(&x, &eps).unwrap();
    let analytic: Vec<f64> = grads
        .encoder
        .layers
        .iter()
        .chain(&grads.decoder.layers)
        .flat_map(|(w, b)| w.data().iter().chain(b).copied().collect::<Vec<_>>())
        .collect();
    let (enc, dec) = g.networks_mut().unwrap();
    let mut flat = enc.flat_params();
    let ne = flat.len();
    flat.extend(dec.flat_params());
    let h = 1e-6;
    for i in 0..flat.len() {
        let mut eval = |delta: f64| {
            let mut p = flat.clone();
            p[i] += delta;
            let (enc, dec) = g.networks_mut().unwrap();
            enc.load_flat_params(&p[..ne]).unwrap();
            dec.load_flat_params(&p[ne..]).unwrap();
            g.elbo_with_noise(&x, &eps).unwrap().0.total
        };
        let fd = (eval(h) - eval(-h)) / (2.0 * h);
        let a = analytic[i];
        let err = (fd - a).abs() / a.abs().max(fd.abs()).max(1e-2);
        assert!(err < 1e-4, "{kind:?} param {i}: fd {fd} analytic {a}");
    }
}

#[test]
fn elbo_gradients_match_finite_differences() {
    for seed in 0..4 {
        check_fd(GeneratorKind::Tvae, seed);
        check_fd(GeneratorKind::Vae, seed);
    }
}

#[test]
fn serialization_round_trips() {
    let mut rng = Rng::new(8);
    let mut g = Generator::new(config(GeneratorKind::Tvae, 2)).unwrap();
    g.fit(&table((0..100).map(|i| (i % 7) as f64 * 1.3).collect()), &mut rng).unwrap();
    let bytes = g.to_bytes().unwrap();
    let back = Generator::from_bytes(&bytes).unwrap();
    assert_eq!(back, g);
    assert_eq!(back.to_bytes().unwrap(), bytes);
    assert_eq!(sha256_hex(&bytes).len(), 64);
    assert!(Generator::from_bytes(&bytes[..bytes.len() - 1]).is_err());
}
