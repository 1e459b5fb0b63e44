use std::path::{Path, PathBuf};
use std::process::Command;

use treeflow::harness::{run_experiment, Experiment, ExperimentConfig};
use treeflow::parallel::Execution;

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(format!("{name}.json"))
}

fn shipped(name: &str) -> ExperimentConfig {
    ExperimentConfig::from_file(&config_path(name)).unwrap()
}

fn report(cfg: &ExperimentConfig, exec: Execution) -> String {
    run_experiment(cfg, exec, false).unwrap().suite.to_json()
}

#[test]
fn shipped_configs_parse() {
    for name in [
        "verify",
        "stone",
        "fdd",
        "binary-entrance",
        "kesten",
        "coalescent",
        "crt",
    ] {
        let cfg = shipped(name);
        assert_eq!(cfg.experiment.name(), name);
        cfg.validate().unwrap();
    }
}

#[test]
fn shipped_verify_config_passes() {
    let out = run_experiment(&shipped("verify"), Execution::Parallel, false).unwrap();
    let bad: Vec<_> = out
        .suite
        .failures()
        .map(|r| format!("{} {}", r.check_id, r.instance))
        .collect();
    assert!(out.suite.all_pass, "failing records: {bad:?}");
    assert!(out.suite.records.len() > 1000);
}

#[test]
fn reports_are_reproducible_across_runs_and_execution() {
    let mut cfg = shipped("coalescent");
    cfg.replicates = 500;
    let a = report(&cfg, Execution::Parallel);
    assert_eq!(a, report(&cfg, Execution::Parallel));
    assert_eq!(a, report(&cfg, Execution::Sequential));

    let mut fdd = shipped("fdd");
    fdd.replicates = 2000;
    let seq = run_experiment(&fdd, Execution::Sequential, true).unwrap();
    let par = run_experiment(&fdd, Execution::Parallel, true).unwrap();
    assert_eq!(seq.suite.to_json(), par.suite.to_json());
    assert_eq!(seq.distances, par.distances);
    assert_eq!(seq.paths, par.paths);
}

#[test]
fn seed_changes_the_report() {
    let mut cfg = shipped("coalescent");
    cfg.replicates = 200;
    let a = report(&cfg, Execution::Parallel);
    cfg.master_seed += 1;
    assert_ne!(a, report(&cfg, Execution::Parallel));
}

#[test]
fn config_errors() {
    let bad = [
        r#"{"experiment": "stone", "n_list": [], "times": [1.0], "replicates": 10, "master_seed": 1}"#,
        r#"{"experiment": "stone", "n_list": [8], "times": [1.0, 0.5], "replicates": 10, "master_seed": 1}"#,
        r#"{"experiment": "stone", "n_list": [8], "times": [1.0], "replicates": 0, "master_seed": 1}"#,
        r#"{"experiment": "stone", "n_list": [8], "times": [1.0], "replicates": 1, "master_seed": 1, "bogus": 2}"#,
        r#"{"experiment": "walk", "n_list": [8], "times": [1.0], "replicates": 1, "master_seed": 1}"#,
    ];
    for text in bad {
        let r = ExperimentConfig::from_json(text).and_then(|c| c.validate());
        assert!(r.is_err(), "accepted {text}");
    }
    assert_eq!(
        Experiment::parse("binary-entrance").unwrap(),
        Experiment::BinaryEntrance
    );
}

fn treeflow(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_treeflow"))
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn cli_writes_outputs_and_reports_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fdd.json");
    std::fs::write(
        &cfg,
        r#"{"experiment": "fdd", "n_list": [8, 32, 128], "times": [0.25, 1.0], "replicates": 20000,
            "master_seed": 2718281828, "family": {"radii": [0.5, 2.0]}}"#,
    )
    .unwrap();
    let out = dir.path().join("run");
    let args = ["fdd", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    let ok = treeflow(&[&args[..], &["--threads", "1", "--dump-paths"]].concat());
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    let first = std::fs::read(out.join("report.json")).unwrap();
    assert!(std::fs::read_to_string(out.join("distances.csv"))
        .unwrap()
        .starts_with("level,radius,"));
    assert!(std::fs::read_dir(out.join("paths")).unwrap().count() > 0);

    let again = treeflow(&[&args[..], &["--threads", "2"]].concat());
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(first, std::fs::read(out.join("report.json")).unwrap());

    let mismatch = treeflow(&[
        "stone",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(mismatch.status.code(), Some(2));

    let empty = dir.path().join("empty.json");
    std::fs::write(
        &empty,
        r#"{"experiment": "fdd", "n_list": [], "times": [1.0], "replicates": 5, "master_seed": 1}"#,
    )
    .unwrap();
    let invalid = treeflow(&[
        "fdd",
        "--config",
        empty.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(invalid.status.code(), Some(2));
}

#[test]
fn cli_exits_one_on_failed_checks() {
    // Two identical levels cannot show a strict decrease.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fdd.json");
    std::fs::write(
        &cfg,
        r#"{"experiment": "fdd", "n_list": [8, 8], "times": [1.0], "replicates": 500, "master_seed": 3}"#,
    )
    .unwrap();
    let out = dir.path().join("run");
    let r = treeflow(&["fdd", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(1), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(out.join("report.json").exists());
}
