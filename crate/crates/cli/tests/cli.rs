use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_rhythmkit");

const SMALL_ING: &str = r#"
experiment = "ing"
seed = 4

[run]
duration_ms = 150.0
transient_ms = 50.0

[ing]
n = 6
drive_spread = 0.1
"#;

const AXES: &str = r#"
[[axis]]
path = "ing.tau_decay"
values = [5.0, 10.0, 20.0]

[[axis]]
path = "ing.drive"
values = [0.8, 1.2]
"#;

fn rhythmkit(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn list_presets_names_every_preset() {
    let out = rhythmkit(&["list-presets"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "theta-period",
        "theta-river",
        "ing-freq-vs-tau",
        "ing-heterogeneity",
        "ping-minimal",
        "ping-heterogeneity",
        "ping-noise",
        "ping-noise-ii",
        "sparse-ping",
        "prc-map",
        "fi-classify",
    ] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing");
    }
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "seed = 1\n[ping]\np_ei = 1.5\n");
    let out = rhythmkit(&["run", "--preset", "ping", "--config", &bad, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("ping.p_ei") && err.contains("line 3"), "{err}");

    let out = rhythmkit(&["run", "--preset", "no-such-preset", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    let out = rhythmkit(&["run", "--preset", "ing", "--set", "ing.nn=3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn numerical_failure_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = rhythmkit(&[
        "run",
        "--preset",
        "ing",
        "--set",
        "ing.n=2",
        "--set",
        "run.dt_ms=0.5",
        "--set",
        "run.duration_ms=100",
        "--set",
        "run.transient_ms=10",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn partial_sweep_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "base.toml", SMALL_ING);
    let axes = write(dir.path(), "axes.toml", "[[axis]]\npath = \"run.dt_ms\"\nvalues = [0.01, 0.5]\n");
    let out_dir = dir.path().join("out");
    let out = rhythmkit(&["sweep", "--config", &cfg, "--axes", &axes, "--jobs", "2", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let runs = fs::read_to_string(out_dir.join("runs.csv")).unwrap();
    assert!(runs.contains("r00000") && runs.contains(",ok,") && runs.contains(",failed,"), "{runs}");
}

#[test]
fn run_writes_manifest_with_sources() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL_ING);
    let out_dir = dir.path().join("out");
    let out = rhythmkit(&["run", "--preset", "ing", "--config", &cfg, "--set", "ing.tau_decay=8", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["experiment"], "ing");
    assert_eq!(manifest["seed"], 4);
    let params = manifest["parameters"].as_array().unwrap();
    let find = |k: &str| params.iter().find(|p| p["key"] == k).unwrap_or_else(|| panic!("{k} missing"));
    assert_eq!(find("ing.tau_decay")["value"], 8.0);
    assert_eq!(find("ing.tau_decay")["source"], "user");
    assert_eq!(find("ing.n")["source"], "user");
    assert_eq!(find("ing.g_ii")["source"], "default");
    assert_eq!(find("ping.n_e")["source"], "default");
    for file in manifest["outputs"].as_array().unwrap() {
        assert!(out_dir.join(file.as_str().unwrap()).exists(), "{file}");
    }
    let spikes = fs::read_to_string(out_dir.join("spikes.csv")).unwrap();
    assert!(spikes.starts_with("neuron_id,time_ms\n"));
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert!(summary.starts_with("run_id,frequency_hz,synchrony_index,participation\n"));
}

fn read_tree(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().unwrap() != "manifest.json" {
                files.push((p.strip_prefix(root).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn sweep_output_is_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "base.toml", SMALL_ING);
    let axes = write(dir.path(), "axes.toml", AXES);
    let mut trees = Vec::new();
    for jobs in ["1", "3"] {
        let out_dir = dir.path().join(format!("out{jobs}"));
        let out = rhythmkit(&["sweep", "--config", &cfg, "--axes", &axes, "--seed", "9", "--jobs", jobs, "--out", out_dir.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        trees.push(read_tree(&out_dir));
    }
    assert_eq!(trees[0].len(), 2 + 6 * 2, "{:?}", trees[0].iter().map(|f| &f.0).collect::<Vec<_>>());
    assert_eq!(trees[0], trees[1]);

    let runs = String::from_utf8(trees[0].iter().find(|f| f.0 == "runs.csv").unwrap().1.clone()).unwrap();
    let header = runs.lines().next().unwrap();
    assert_eq!(header, "run_id,seed,status,ing.tau_decay,ing.drive,error");
    // last axis varies fastest
    let second: Vec<&str> = runs.lines().nth(2).unwrap().split(',').collect();
    assert_eq!(&second[3..5], ["5.0", "1.2"]);
}
