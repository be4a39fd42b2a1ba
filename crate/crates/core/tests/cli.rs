use std::path::Path;
use std::process::Command;

use rextree::harness::config::{ExperimentConfig, ModelSpec};
use rextree::harness::runner::{load_bundle_config, run_experiment};

fn rextree(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_rextree")).args(args).output().unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(rextree(&["split-table", "--format", "csv"]).status.code(), Some(0));
    assert_eq!(rextree(&["grow", "--reps", "zero"]).status.code(), Some(2));
    assert_eq!(rextree(&["grow", "--reps", "0"]).status.code(), Some(2));
    assert_eq!(rextree(&["grow", "--family", "alpha_gamma", "--alpha", "0.2", "--gamma", "0.5"]).status.code(), Some(2));
    assert_eq!(rextree(&["nope"]).status.code(), Some(2));
    // The sweep gate is known to fail on the full grid.
    assert_eq!(rextree(&["sampling-consistency"]).status.code(), Some(3));
}

#[test]
fn csv_output_has_a_header() {
    let out = rextree(&["grow", "--n", "5", "--reps", "3", "--seed", "9", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "replicate,newick");
    assert_eq!(lines.len(), 4);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"experiment":"grow","n_grid":[4],"reps":2,"master_seed":1}"#).unwrap();
    let out = rextree(&["grow", "--config", cfg.to_str().unwrap(), "--reps", "5", "--format", "csv"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 6);
    let wrong = rextree(&["gnedin", "--config", cfg.to_str().unwrap()]);
    assert_eq!(wrong.status.code(), Some(2));
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn bundles_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let status = rextree(&["grow", "--n", "6", "--reps", "50", "--seed", "3", "--out", out.to_str().unwrap()]).status;
    assert_eq!(status.code(), Some(0));
    let cfg = load_bundle_config(&out).unwrap();
    let again = run_experiment(&cfg).unwrap();
    assert_eq!(again.table.to_csv().unwrap(), read(&out, "table.csv"));
    let summary: serde_json::Value = serde_json::from_str(&read(&out, "summary.json")).unwrap();
    assert_eq!(summary["library_version"], env!("CARGO_PKG_VERSION"));
    assert!(summary["wall_time_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let mut cfg = ExperimentConfig::new("reduced-crt");
    cfg.model = Some(ModelSpec::SingleAtom);
    cfg.k = Some(4);
    cfg.index = Some(0.5);
    cfg.reps = 300;
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| run_experiment(&cfg).unwrap().table.to_csv().unwrap())
    };
    assert_eq!(run(1), run(4));
}
