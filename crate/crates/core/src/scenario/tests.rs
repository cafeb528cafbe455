use super::*;

const EXPECTED: [(&[u8], &[u8]); 8] = [
    (
        &[2, 1, 2, 1, 2, 1, 2, 1, 2, 1, 2, 1],
        &[1, 1, 3, 3, 2, 2, 4, 4, 6, 6, 5, 5],
    ),
    (
        &[1, 2, 1, 2, 1, 2, 1, 2, 1, 2, 1, 2],
        &[5, 5, 6, 6, 4, 4, 2, 2, 3, 3, 1, 1],
    ),
    (
        &[2, 3, 2, 3, 2, 3, 2, 3, 2, 3, 2, 3],
        &[1, 1, 3, 3, 2, 2, 4, 4, 6, 6, 5, 5],
    ),
    (
        &[3, 2, 3, 2, 3, 2, 3, 2, 3, 2, 3, 2],
        &[5, 5, 6, 6, 4, 4, 2, 2, 3, 3, 1, 1],
    ),
    (
        &[3, 1, 3, 1, 3, 1, 3, 1, 3, 1, 3, 1],
        &[1, 1, 3, 3, 2, 2, 4, 4, 6, 6, 5, 5],
    ),
    (
        &[1, 3, 1, 3, 1, 3, 1, 3, 1, 3, 1, 3],
        &[5, 5, 6, 6, 4, 4, 2, 2, 3, 3, 1, 1],
    ),
    (
        &[2, 3, 1, 2, 3, 1, 2, 3, 1, 2, 3, 1, 2, 3, 1, 2, 3, 1],
        &[1, 1, 1, 3, 3, 3, 2, 2, 2, 4, 4, 4, 6, 6, 6, 5, 5, 5],
    ),
    (
        &[1, 3, 2, 1, 3, 2, 1, 3, 2, 1, 3, 2, 1, 3, 2, 1, 3, 2],
        &[5, 5, 5, 6, 6, 6, 4, 4, 4, 2, 2, 2, 3, 3, 3, 1, 1, 1],
    ),
];

#[test]
fn sequences_match_the_fixed_tables() {
    for (case, (ue, pattern)) in (1u8..=8).zip(EXPECTED) {
        let tasks = build_sequence(case, 5, 1).unwrap();
        assert_eq!(tasks.len(), ue.len());
        for (i, t) in tasks.iter().enumerate() {
            assert_eq!(t.ue.index() + 1, usize::from(ue[i]), "case {case} task {i}");
            assert_eq!(t.pattern.label(), pattern[i], "case {case} task {i}");
            assert_eq!(t.task_id, i);
            assert_eq!(t.dataset.len(), 5);
        }
    }
}

#[test]
fn case_examples() {
    let c1 = build_sequence(1, 3, 0).unwrap();
    assert_eq!((c1[0].ue, c1[0].pattern), (UeType::Ue2, Pattern::P1));
    let c8 = build_sequence(8, 3, 0).unwrap();
    assert_eq!((c8[0].ue, c8[0].pattern), (UeType::Ue1, Pattern::P5));
    assert_eq!(build_sequence(3, 3, 0).unwrap().len(), 12);
    assert_eq!(build_sequence(7, 3, 0).unwrap().len(), 18);
    assert!(matches!(build_sequence(9, 3, 0), Err(Error::Domain(_))));
    assert!(matches!(build_sequence(0, 3, 0), Err(Error::Domain(_))));
}

#[test]
fn config_vectors_are_one_hot() {
    assert_eq!(task_config_vector(UeType::Ue2, 3).unwrap().entries(), &[0.0, 1.0, 0.0]);
    assert_eq!(task_config_vector(UeType::Ue1, 2).unwrap().entries(), &[1.0, 0.0]);
    assert_eq!(task_config_vector(UeType::Ue3, 3).unwrap().entries(), &[0.0, 0.0, 1.0]);
}

#[test]
fn synthesis_is_deterministic() {
    let all: Vec<usize> = (0..7).collect();
    let a = synthesize_task_data(UeType::Ue1, Pattern::P5, &all, 300, 42).unwrap();
    let b = synthesize_task_data(UeType::Ue1, Pattern::P5, &all, 300, 42).unwrap();
    assert_eq!(a, b);
    let c = synthesize_task_data(UeType::Ue1, Pattern::P5, &all, 300, 43).unwrap();
    assert_ne!(a, c);
    assert!(synthesize_task_data(UeType::Ue1, Pattern::P5, &all, 0, 42).is_err());
}

#[test]
fn idle_good_channel_sits_at_base_delay() {
    let opts = SynthesisOptions { spikes: false };
    for ue in UeType::ALL {
        let d = synthesize_with(ue, Pattern::P1, &[0], 500, 7, opts).unwrap();
        let base = RECIPE.base_ms[ue.index()];
        let inside = d
            .targets()
            .iter()
            .filter(|y| (*y - base).abs() <= 3.0 * RECIPE.noise_std)
            .count();
        assert!(inside as f64 >= 0.99 * d.len() as f64, "{ue}: {inside} of {}", d.len());
        let mean = d.targets().iter().sum::<f64>() / d.len() as f64;
        assert!((mean - base).abs() < 3.0 * RECIPE.noise_std / (d.len() as f64).sqrt());
    }
}

#[test]
fn device_types_shift_the_mean_delay() {
    let all: Vec<usize> = (0..7).collect();
    let mean = |ue| {
        let d = synthesize_task_data(ue, Pattern::P2, &all, 4000, 3).unwrap();
        d.targets().iter().sum::<f64>() / d.len() as f64
    };
    assert!(mean(UeType::Ue3) - mean(UeType::Ue1) >= 5.0);
}

fn ks(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn different_devices_are_distinguishable() {
    let all: &[usize] = &[0, 1, 2, 3, 4, 5, 6];
    let patterns = [Pattern::P1, Pattern::P2, Pattern::P3, Pattern::P4, Pattern::P5, Pattern::P6];
    let data: Vec<(UeType, Vec<f64>)> = UeType::ALL
        .iter()
        .flat_map(|&ue| {
            patterns.iter().enumerate().map(move |(k, &p)| {
                let d = synthesize_task_data(ue, p, all, 2000, 100 + k as u64).unwrap();
                (ue, d.targets().to_vec())
            })
        })
        .collect();
    for (ua, a) in &data {
        for (ub, b) in &data {
            if ua != ub {
                let d = ks(a, b);
                assert!(d > 0.2, "{ua} vs {ub}: KS {d}");
            }
        }
    }
}

#[test]
fn trajectories_stay_in_range() {
    for p in [Pattern::P4, Pattern::P5, Pattern::P6] {
        for i in 0..1000 {
            let q = channel_quality(p, i as f64 / 1000.0);
            assert!((0.3 - 1e-12..=0.9 + 1e-12).contains(&q), "{p} at {i}: {q}");
        }
    }
    assert_eq!(channel_quality(Pattern::P6, 0.0), 0.9);
    assert_eq!(channel_quality(Pattern::P5, 0.0), 0.9);
}

#[test]
fn scenario_file_parsing() {
    let f = ScenarioFile::parse(
        "# demo\ncase = 3\nsamples = 500 # rows\nseeds = 1, 2,3\nalpha=0.25\nmethods = naive,cumulative\n",
    )
    .unwrap();
    assert_eq!(f.case, Some(3));
    assert_eq!(f.samples, Some(500));
    assert_eq!(f.seeds, Some(vec![1, 2, 3]));
    assert_eq!(f.alpha, Some(0.25));
    assert_eq!(f.methods.unwrap(), vec!["naive", "cumulative"]);

    let f = ScenarioFile::parse("ue = 1,2\npattern = 4,6\n").unwrap();
    assert_eq!(f.ue, Some(vec![UeType::Ue1, UeType::Ue2]));
    assert_eq!(f.pattern, Some(vec![Pattern::P4, Pattern::P6]));

    assert!(matches!(ScenarioFile::parse("bogus = 1"), Err(Error::Parse { row: 1, .. })));
    assert!(matches!(ScenarioFile::parse("\nsamples = x"), Err(Error::Parse { row: 2, .. })));
    assert!(ScenarioFile::parse("ue = 4\npattern = 1").is_err());
    assert!(ScenarioFile::parse("case = 1\nue = 1\npattern = 1").is_err());
    assert!(ScenarioFile::parse("ue = 1").is_err());
    assert!(ScenarioFile::parse("no equals sign").is_err());
}

#[test]
fn custom_sequences_are_validated() {
    assert!(SequenceSpec::custom(vec![UeType::Ue1], vec![], 10, 0).is_err());
    assert!(SequenceSpec::custom(vec![UeType::Ue1], vec![Pattern::P1], 0, 0).is_err());
    let s = SequenceSpec::custom(vec![UeType::Ue3, UeType::Ue1, UeType::Ue3], vec![Pattern::P1; 3], 10, 0).unwrap();
    assert_eq!(s.device_types(), vec![UeType::Ue3, UeType::Ue1]);
    assert_eq!(s.name(), "custom");
}

#[test]
fn export_writes_schema_and_tasks() {
    let dir = tempfile::tempdir().unwrap();
    let tasks = build_sequence(1, 20, 5).unwrap();
    let paths = export_tasks(&tasks, dir.path()).unwrap();
    assert_eq!(paths.len(), 13);
    let schema = crate::tabular::Schema::from_file(&paths[0]).unwrap();
    let back = crate::tabular::load_csv(&paths[1], &std::sync::Arc::new(schema)).unwrap();
    assert_eq!(back.len(), 20);
    for (a, b) in back.targets().iter().zip(tasks[0].dataset.targets()) {
        assert!((a - b).abs() <= 1e-12 * b.abs());
    }
}
