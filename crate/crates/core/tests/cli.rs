use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use quermass::experiments::{multitype, sweep, ExperimentConfig};

fn quermass(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quermass"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

const POISSON: &str = r#"{
  "model": {"theta": [0, 0, 0], "z": 1.0, "r0": 0.5, "r1": 0.5},
  "window": [0, 0, 10, 10],
  "chain": {"nSteps": 60000, "thinning": 200, "poissonInit": true},
  "seed": 12
}"#;

fn run(dir: &Path, config: &Path, out: &str, cmd: &str, extra: &[&str]) -> Output {
    let out = dir.join(out);
    let mut args = vec!["--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), cmd];
    args.extend(extra);
    quermass(&args)
}

#[test]
fn sample_poisson_smoke_and_reproducibility() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write(t.path(), "poisson.json", POISSON);
    for out in ["a", "b"] {
        let o = run(t.path(), &cfg, out, "sample", &[]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = fs::read(t.path().join("a/trace.csv")).unwrap();
    assert_eq!(a, fs::read(t.path().join("b/trace.csv")).unwrap());
    assert!(a.starts_with(b"step,n,area,perimeter,euler,components,holes,accepted,move,type_counts\n"));

    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(t.path().join("a/summary.json")).unwrap()).unwrap();
    let mean = summary["meanN"].as_f64().unwrap();
    assert!((mean - 100.0).abs() < 6.0, "mean n {mean}");

    let meta: serde_json::Value = serde_json::from_slice(&fs::read(t.path().join("a/meta.json")).unwrap()).unwrap();
    assert!(meta["timestampUnix"].as_u64().is_some());

    let o = quermass(&[
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "13",
        "--out",
        t.path().join("c").to_str().unwrap(),
        "sample",
    ]);
    assert!(o.status.success());
    assert_ne!(a, fs::read(t.path().join("c/trace.csv")).unwrap());
}

#[test]
fn config_errors_exit_2_with_line() {
    let t = tempfile::tempdir().unwrap();
    let missing = t.path().join("nope.json");
    let o = quermass(&["--config", missing.to_str().unwrap(), "sample"]);
    assert_eq!(o.status.code(), Some(2));

    let empty = POISSON.replace("\"seed\": 12", "\"seed\": 12,\n  \"sweep\": {\"parameter\": \"z\", \"values\": []}");
    let cfg = write(t.path(), "empty.json", &empty);
    let o = run(t.path(), &cfg, "o", "sweep", &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("empty.json:6:"), "{err}");

    let cfg = write(t.path(), "nosweep.json", POISSON);
    assert_eq!(run(t.path(), &cfg, "o", "sweep", &[]).status.code(), Some(2));
    assert_eq!(run(t.path(), &cfg, "o", "multitype", &[]).status.code(), Some(2));
    assert_eq!(run(t.path(), &cfg, "o", "percolate", &[]).status.code(), Some(2));

    let cfg = write(t.path(), "syntax.json", "{\n  \"model\": {\n    \"z\": ,\n  }\n}");
    let o = run(t.path(), &cfg, "o", "sample", &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("syntax.json:3:"));
}

#[test]
fn explosion_exits_3() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write(
        t.path(),
        "boom.json",
        r#"{
  "model": {"theta": [0, -5, 0], "z": 0.01, "r0": 0.5, "r1": 0.5},
  "window": [0, 0, 10, 10],
  "chain": {"nSteps": 200000},
  "seed": 1
}"#,
    );
    let o = run(t.path(), &cfg, "o", "sample", &[]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn validate_exit_codes() {
    let t = tempfile::tempdir().unwrap();
    let out = |n: &str| t.path().join(n).to_str().unwrap().to_owned();
    let ok = quermass(&["--out", &out("ok"), "validate", "--scale", "0.02"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));

    let mutant = quermass(&["--out", &out("mut"), "validate", "--scale", "0.02", "--mutate-d-euler"]);
    assert_eq!(mutant.status.code(), Some(1));

    let coarse = quermass(&["--out", &out("coarse"), "validate", "--scale", "0.02", "--oracle-cells-per-r0", "4"]);
    assert_eq!(coarse.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(t.path().join("coarse/validation.json")).unwrap()).unwrap();
    let oracle = report["properties"]
        .as_array()
        .unwrap()
        .iter()
        .find(|p| p["name"] == "kernel_vs_oracle")
        .unwrap();
    assert_eq!(oracle["status"], "skip");
    assert!(oracle["detail"].as_str().unwrap().contains("coarser"));
}

#[test]
fn percolate_a_saved_snapshot() {
    let t = tempfile::tempdir().unwrap();
    let dense = POISSON
        .replace("\"z\": 1.0", "\"z\": 3.0")
        .replace("[0, 0, 10, 10]", "[0, 0, 40, 40]")
        .replace("\"nSteps\": 60000", "\"nSteps\": 2000");
    let cfg = write(t.path(), "dense.json", &dense);
    assert!(run(t.path(), &cfg, "s", "sample", &[]).status.success());
    let perc = dense.replace(
        "\"seed\": 12",
        "\"seed\": 12,\n  \"analysis\": {\"diamondEll\": 2.2},\n  \"input\": \"s/snapshot.json\"",
    );
    let cfg = write(t.path(), "perc.json", &perc);
    let o = run(t.path(), &cfg, "p", "percolate", &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let sites = fs::read_to_string(t.path().join("p/sites.csv")).unwrap();
    assert!(sites.starts_with("i,j,xi\n"));
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(t.path().join("p/percolation.json")).unwrap()).unwrap();
    assert_eq!(report["summary"]["nSites"], 4);
    assert_eq!(report["summary"]["pStar"], 0.592746);
    assert_eq!(report["continuumMismatches"], 0);
}

#[test]
fn positive_theta3_favours_holes() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/theta3_sweep.json");
    let cfg = ExperimentConfig::load(&path).unwrap();
    let r = sweep(&cfg).unwrap();
    let (neg, pos) = (&r.points[0], &r.points[1]);
    assert_eq!((neg.value, pos.value), (-1.0, 1.0));
    assert!(
        pos.holes_per_area_mean > neg.holes_per_area_mean,
        "{} vs {}",
        pos.holes_per_area_mean,
        neg.holes_per_area_mean
    );
}

#[test]
fn tiny_window_has_a_single_type() {
    let cfg = ExperimentConfig::parse(
        r#"{
  "model": {"theta": [0, 0, 0], "z": 2.0, "r0": 1, "r1": 1, "k": 2},
  "window": [0, 0, 1, 1],
  "chain": {"nSteps": 20000, "thinning": 10, "nReplicas": 3},
  "seed": 5
}"#,
        "tiny",
    )
    .unwrap();
    let r = multitype(&cfg).unwrap();
    assert_eq!(r.snapshot_dominance.mean, 1.0);
}
