use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cotune(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cotune")).args(args).output().unwrap()
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_config(dir: &Path, budget: usize) -> String {
    let path = dir.join("exp.json");
    let cfg = format!(
        r#"{{
            "landscapes": [{{"kind": "csv", "name": "land", "path": "land.csv"}}],
            "requirements": {{"files": ["reqs/t1_d0.2.json"]}},
            "tuners": [{{"kind": "cotune"}}, {{"kind": "ga_p"}}],
            "params": {{"budget": {budget}}},
            "repeats": 2,
            "output": "results"
        }}"#
    );
    fs::write(&path, cfg).unwrap();
    path.display().to_string()
}

/// Synthesizes `land.csv` and one generated requirement at `reqs/t1_d0.2.json`.
fn prepare(dir: &Path) {
    let land = dir.join("land.csv");
    let reqs = dir.join("reqs");
    let s = ok(&cotune(&["synth", "--seed", "4", "--options", "7", "--out", land.to_str().unwrap()]));
    assert!(s.contains("128 configurations"));
    ok(&cotune(&[
        "gen-reqs",
        "--landscape",
        land.to_str().unwrap(),
        "--d",
        "0.2",
        "--types",
        "1",
        "--out",
        reqs.to_str().unwrap(),
    ]));
    let manifest = fs::read_to_string(reqs.join("manifest.csv")).unwrap();
    assert!(manifest.starts_with("landscape,type_index,d_requested,d_achieved,file"));
    assert!(reqs.join("t1_d0.2.json").exists(), "{manifest}");
}

#[test]
fn synth_gen_run_rank_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    prepare(dir.path());
    let cfg = write_config(dir.path(), 40);
    let table = ok(&cotune(&["run", "--config", &cfg, "--jobs", "1"]));
    assert!(table.contains("4 runs, 0 failed"), "{table}");
    let results = dir.path().join("results");
    let before = fs::read_to_string(results.join("summary.csv")).unwrap();

    ok(&cotune(&["rank", "--results", results.to_str().unwrap()]));
    assert_eq!(fs::read_to_string(results.join("summary.csv")).unwrap(), before);
    ok(&cotune(&["rank", "--results", results.to_str().unwrap(), "--test", "kruskal"]));
}

#[test]
fn failed_runs_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    prepare(dir.path());
    let cfg = write_config(dir.path(), 3);
    let out = cotune(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("✗"));
}

#[test]
fn bad_config_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 40);
    let out = cotune(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not exist"));
}
