use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn tomo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tomo")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn run_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("w4");
    let out = tomo(&[
        "run",
        "--target",
        "w4",
        "--true-fidelity",
        "0.95",
        "--runs",
        "3",
        "--seed",
        "4",
        "--workers",
        "2",
        "--dump-counts",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let runs = fs::read_to_string(out_dir.join("runs.csv")).unwrap();
    assert!(runs.starts_with("run,estimator,fidelity,min_eig,iterations,converged,loglik\n"));
    assert_eq!(runs.lines().count(), 1 + 6);
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["seed"], 4);
    assert!((summary["estimators"]["lin"]["f0"].as_f64().unwrap() - 0.95).abs() < 1e-12);
    assert!(out_dir.join("histogram.csv").exists());
    assert!(out_dir.join("counts/run00000.csv").exists());
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("s.conf");
    let out_dir = dir.path().join("out");
    fs::write(
        &conf,
        format!(
            "# noisy GHZ, LIN only\ntarget = ghz4\ntrue_fidelity = 0.8\nruns = 50\nestimators = lin\nout_dir = {}\n",
            out_dir.display()
        ),
    )
    .unwrap();
    let out = tomo(&["run", "--config", conf.to_str().unwrap(), "--runs", "4"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let runs = fs::read_to_string(out_dir.join("runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 1 + 4);
    assert!(runs.lines().skip(1).all(|l| l.contains(",lin,")));
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let mut csvs = Vec::new();
    for (i, workers) in ["1", "4"].iter().enumerate() {
        let d = dir.path().join(format!("o{i}"));
        let out = tomo(&[
            "run", "--target", "random-pure", "--target-seed", "3", "--true-fidelity", "0.9", "--runs", "4",
            "--workers", workers, "--out-dir", d.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
        csvs.push(fs::read(d.join("runs.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn failures_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_ne!(code(&tomo(&["run", "--target", "bell", "--out-dir", d])), 0);
    assert_ne!(code(&tomo(&["run", "--true-fidelity", "0.01", "--runs", "2", "--out-dir", d])), 0);
    assert_ne!(code(&tomo(&["run", "--config", "/nonexistent/x.conf"])), 0);
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let unwritable = blocker.join("sub");
    let out = tomo(&["run", "--runs", "2", "--estimators", "lin", "--out-dir", unwritable.to_str().unwrap()]);
    assert_ne!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

fn check(dir: &Path, contents: &str, pom: &str) -> i32 {
    let f = dir.join("p.txt");
    fs::write(&f, contents).unwrap();
    code(&tomo(&["check-constraints", "--pom", pom, f.to_str().unwrap()]))
}

#[test]
fn check_constraints_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(check(d, "0.25 0.25 0.25 0.25\n", "tetrahedron"), 0);
    assert_eq!(check(d, "0.5, 0.16666666666666666, 0.16666666666666666, 0.16666666666666666", "tetrahedron"), 0);
    assert_eq!(check(d, "1 0 0 0", "tetrahedron"), 1);
    assert_eq!(check(d, "0.5 0 0.25 0.25", "bb84"), 0);
    assert_eq!(check(d, "0.3 0.3 0.2 0.2", "bb84"), 1);
    assert_eq!(check(d, "25 25 30 20", "bb84-counts"), 0);
    assert_eq!(check(d, "10 0 3 0", "bb84-counts"), 1);
    assert_eq!(check(d, "0 0 0 5", "bb84-counts"), 2);
    assert_eq!(check(d, "0.5 0.5", "tetrahedron"), 2);
    assert_eq!(code(&tomo(&["check-constraints", "/nonexistent"])), 2);
}

#[test]
fn table1_suite_runs_small() {
    let dir = tempfile::tempdir().unwrap();
    let out = tomo(&["table1", "--runs", "2", "--estimators", "lin", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(dir.path().join("table1.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 9);
    assert!(dir.path().join("phi-0.016/true_state.txt").exists());
    assert!(dir.path().join("ghz4-0.8/runs.csv").exists());
    assert!(dir.path().join("theta-0.8/summary.json").exists());
}
