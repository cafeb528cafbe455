use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_replayforge"));
    c.env_remove("REPLAYFORGE_SEED").env("RUST_LOG", "warn");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn quick_run(out: &Path, methods: &str, extra: &[&str]) -> Output {
    let out = out.to_str().unwrap();
    let mut args = vec![
        "run", "--case", "1", "--methods", methods, "--seeds", "1", "--samples", "500", "--out", out,
        "--solver-epochs", "3", "--generator-epochs", "2",
    ];
    args.extend_from_slice(extra);
    run(&args)
}

fn files(dir: &Path, ext: &str) -> Vec<String> {
    let mut v: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(ext))
        .collect();
    v.sort();
    v
}

#[test]
fn run_writes_reports_and_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let o = quick_run(dir.path(), "naive,cumulative", &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        files(dir.path(), ".json"),
        vec!["case1_cumulative_seed1.json", "case1_naive_seed1.json"]
    );
    let csv = fs::read_to_string(dir.path().join("comparison.csv")).unwrap();
    assert!(csv.starts_with("method,case,seed,metric,k,value\n"));
    assert!(csv.contains("naive,case1,1,ave_mape,,"));
    assert!(csv.contains("cumulative,case1,1,f_k,4,"));
    assert!(dir.path().join("timing.csv").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(quick_run(a.path(), "naive,multigen-tvae", &[]).status.success());
    assert!(quick_run(b.path(), "naive,multigen-tvae", &[]).status.success());
    for name in files(a.path(), ".json") {
        assert_eq!(
            fs::read(a.path().join(&name)).unwrap(),
            fs::read(b.path().join(&name)).unwrap(),
            "{name}"
        );
    }
    assert_eq!(
        fs::read(a.path().join("comparison.csv")).unwrap(),
        fs::read(b.path().join("comparison.csv")).unwrap()
    );
}

#[test]
fn resumed_runs_match_fresh_ones() {
    let fresh = tempfile::tempdir().unwrap();
    let resumed = tempfile::tempdir().unwrap();
    let ckpt = tempfile::tempdir().unwrap();
    let c = ckpt.path().to_str().unwrap();
    assert!(quick_run(fresh.path(), "singlegen-tvae", &[]).status.success());
    assert!(quick_run(resumed.path(), "singlegen-tvae", &["--resume", c]).status.success());
    assert!(ckpt.path().join("case1_singlegen-tvae_seed1/progress.json").exists());
    // A second pass finds every task complete and only re-emits the report.
    assert!(quick_run(resumed.path(), "singlegen-tvae", &["--resume", c]).status.success());
    let name = "case1_singlegen-tvae_seed1.json";
    assert_eq!(
        fs::read(fresh.path().join(name)).unwrap(),
        fs::read(resumed.path().join(name)).unwrap()
    );
}

#[test]
fn unknown_method_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = quick_run(dir.path(), "naive,replay", &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    for m in ["naive", "cumulative", "singlegen-vae", "singlegen-tvae", "multigen-tvae"] {
        assert!(err.contains(m), "{err}");
    }
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run(&["run", "--methods", "naive", "--out", out]).status.code(), Some(2));
    assert_eq!(run(&["run", "--case", "9", "--out", out]).status.code(), Some(2));
    assert_eq!(run(&["run", "--case", "1", "--alpha", "2", "--out", out]).status.code(), Some(2));
    assert_eq!(run(&["run", "--case", "1", "--tail-pct", "100", "--out", out]).status.code(), Some(2));
    assert_eq!(run(&["run", "--case", "1", "--jobs", "0", "--out", out]).status.code(), Some(2));
    assert_eq!(run(&["run", "--case", "1", "--policy", "all", "--out", out]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "case = 1\nwat = 3\n").unwrap();
    let o = run(&["run", "--scenario", bad.to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2") || stderr(&o).contains("row 2"), "{}", stderr(&o));
}

#[test]
fn scenario_files_drive_custom_sequences() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("s.txt");
    fs::write(
        &scenario,
        "# two devices, three tasks\nue = 1, 3, 1\npattern = 1, 5, 2\nsamples = 120\nseeds = 4, 5\n\
         methods = naive, multigen-tvae\nsolver_epochs = 2\ngenerator_epochs = 2\nalpha = 0.4\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = run(&[
        "run",
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--seeds",
        "4",
        "--jobs",
        "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        files(&out, ".json"),
        vec!["custom_multigen-tvae_seed4.json", "custom_naive_seed4.json"]
    );
    let report = fs::read_to_string(out.join("custom_naive_seed4.json")).unwrap();
    assert!(report.contains("\"alpha\": 0.4"));
}

#[test]
fn export_data_writes_every_task() {
    let dir = tempfile::tempdir().unwrap();
    let c1 = dir.path().join("c1");
    let o = run(&["export-data", "--case", "1", "--out", c1.to_str().unwrap(), "--samples", "30"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(files(&c1, ".csv").len(), 12);
    assert_eq!(files(&c1, ".txt"), vec!["schema.txt"]);
    assert_eq!(stdout(&o).lines().count(), 13);

    let c7 = dir.path().join("c7");
    assert!(run(&["export-data", "--case", "7", "--out", c7.to_str().unwrap(), "--samples", "10"]).status.success());
    assert_eq!(files(&c7, ".csv").len(), 18);

    let again = dir.path().join("again");
    let o = bin()
        .env("REPLAYFORGE_SEED", "1")
        .args(["export-data", "--case", "1", "--out", again.to_str().unwrap(), "--samples", "30"])
        .output()
        .unwrap();
    assert!(o.status.success());
    for name in files(&c1, ".csv") {
        assert_eq!(fs::read(c1.join(&name)).unwrap(), fs::read(again.join(&name)).unwrap());
    }
    let other = dir.path().join("other");
    assert!(run(&["export-data", "--case", "1", "--out", other.to_str().unwrap(), "--samples", "30", "--seed", "2"])
        .status
        .success());
    let first = &files(&c1, ".csv")[0];
    assert_ne!(fs::read(c1.join(first)).unwrap(), fs::read(other.join(first)).unwrap());
    assert_eq!(run(&["export-data", "--case", "0", "--out", other.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn report_tables_and_filters() {
    let dir = tempfile::tempdir().unwrap();
    assert!(quick_run(dir.path(), "naive,cumulative", &[]).status.success());
    let d = dir.path().to_str().unwrap();

    let o = run(&["report", d]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    for col in ["method", "AveMAPE", "F", "F_4", "F_8"] {
        assert!(lines[0].split_whitespace().any(|h| h == col), "{}", lines[0]);
    }
    assert!(lines[1].contains("naive") && lines[2].contains("cumulative"));

    let o = run(&["report", d, "--metric", "f_k", "--k", "4"]);
    let header: Vec<String> = stdout(&o).lines().next().unwrap().split_whitespace().map(String::from).collect();
    assert_eq!(header, vec!["sequence", "method", "seeds", "F_4"]);

    let o = run(&["report", d, "--tail"]);
    assert!(stdout(&o).lines().next().unwrap().contains("coverage"));

    assert_eq!(run(&["report", d, "--metric", "f_k"]).status.code(), Some(2));
    assert_eq!(run(&["report", d, "--metric", "loss"]).status.code(), Some(2));

    fs::write(dir.path().join("broken.json"), "{ not json").unwrap();
    let o = run(&["report", d]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("broken.json"));

    let empty = tempfile::tempdir().unwrap();
    assert_eq!(run(&["report", empty.path().to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(run(&["report", "/nonexistent/reports"]).status.code(), Some(1));
}

#[test]
fn report_shows_stored_values() {
    let dir = tempfile::tempdir().unwrap();
    assert!(quick_run(dir.path(), "naive", &[]).status.success());
    let text = fs::read_to_string(dir.path().join("case1_naive_seed1.json")).unwrap();
    let o = run(&["report", dir.path().to_str().unwrap(), "--metric", "ave_mape"]);
    let line = stdout(&o).lines().nth(1).unwrap().to_string();
    let shown: f64 = line.split_whitespace().last().unwrap().parse().unwrap();
    let stored = text
        .lines()
        .find(|l| l.trim_start().starts_with("\"ave_mape\""))
        .and_then(|l| l.split(':').nth(1))
        .map(|v| v.trim().trim_end_matches(',').parse::<f64>().unwrap())
        .unwrap();
    assert!((shown - stored).abs() <= 5e-5);
}
