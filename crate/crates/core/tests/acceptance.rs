//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always reach the console.
//! Exits nonzero when a criterion fails that is not listed in
//! `KNOWN_FAILURES`, or on any failure when `QUERMASS_ACCEPTANCE_STRICT`
//! is set. `QUERMASS_ACCEPTANCE=1,5,9` runs a subset.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use quermass::experiments::{multitype, percolate, sweep, ExperimentConfig, SweepReport};
use quermass::validation::{
    delta_identity, hole_lemmas, kernel_vs_oracle, local_change_bounds, poisson_reduction, sandwich,
    OracleCheck, PoissonCheck, PropertyResult, SandwichCheck, Status,
};

/// Criteria that fail at desk scale for reasons recorded in the README.
const KNOWN_FAILURES: &[u32] = &[7];

struct Outcome {
    passed: bool,
    detail: String,
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn config(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(&configs_dir().join(name)).expect("shipped config loads")
}

fn properties(results: &[PropertyResult]) -> Outcome {
    let passed = results.iter().all(|r| r.status == Status::Pass && r.checked > 0);
    let detail = results
        .iter()
        .map(|r| {
            format!(
                "{} {:?} checked={} skipped={} violations={}{}",
                r.name,
                r.status,
                r.checked,
                r.skipped,
                r.violations,
                if r.detail.is_empty() { String::new() } else { format!(" ({})", r.detail) }
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    Outcome { passed, detail }
}

fn c1() -> Outcome {
    properties(&[kernel_vs_oracle(OracleCheck::default())])
}

fn c2() -> Outcome {
    properties(&[delta_identity(1000, 2, false)])
}

fn c3() -> Outcome {
    properties(&[local_change_bounds(10_000, 3)])
}

fn c4() -> Outcome {
    properties(&hole_lemmas(200, 4, 64.0))
}

fn c5() -> Outcome {
    properties(&poisson_reduction(PoissonCheck::default()))
}

fn c6() -> Outcome {
    properties(&[sandwich(SandwichCheck::default())])
}

fn crossing_line(r: &SweepReport) -> String {
    r.points
        .iter()
        .map(|p| {
            format!(
                "eta={:.2}: {:.3}±{:.3}",
                p.value * std::f64::consts::PI,
                p.crossing_frequency_mean,
                p.crossing_frequency_se
            )
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn c7() -> Outcome {
    let boolean = sweep(&config("boolean_sweep.json")).expect("boolean sweep runs");
    let c: Vec<(f64, f64)> = boolean
        .points
        .iter()
        .map(|p| (p.crossing_frequency_mean, p.crossing_frequency_se))
        .collect();
    let increasing = c.windows(2).all(|w| w[1].0 > w[0].0);
    let (first, last) = (c[0], c[c.len() - 1]);
    let pooled = (first.1.powi(2) + last.1.powi(2)).sqrt();
    let gap = last.0 - first.0 > 2.0 * pooled;
    let quermass = sweep(&config("quermass_sweep.json")).expect("quermass sweep runs");
    let top = quermass.points.last().expect("nonempty sweep").crossing_frequency_mean;
    Outcome {
        passed: increasing && gap && top > 0.9,
        detail: format!(
            "boolean [{}] increasing={increasing} endpoint gap>2se={gap}; theta=(0.3,0.1,-0.5) [{}] top>0.9={}",
            crossing_line(&boolean),
            crossing_line(&quermass),
            top > 0.9
        ),
    }
}

fn c8() -> Outcome {
    let base = config("percolate.json");
    let mut checked = 0;
    let mut mismatches = 0;
    let mut parts = Vec::new();
    let mut runs: Vec<(String, ExperimentConfig)> = Vec::new();
    for eta in [1.2, 1.6, 2.0, 2.4, 3.0] {
        let mut c = base.clone();
        c.model.z = eta / (std::f64::consts::PI * 0.25);
        c.chain.n_replicas = 10;
        runs.push((format!("eta={eta}"), c));
    }
    let mut q = base.clone();
    q.model.theta = [0.3, 0.1, -0.5];
    q.model.z = 3.0 / (std::f64::consts::PI * 0.25);
    q.chain.n_steps = 40_000;
    q.chain.burn_in = Some(20_000);
    runs.push(("theta=(0.3,0.1,-0.5) eta=3".into(), q));
    for (name, c) in runs {
        let r = percolate(&c).expect("percolate runs");
        checked += r.lattice_crossings;
        mismatches += r.continuum_mismatches;
        parts.push(format!("{name}: {}/{}", r.lattice_crossings, r.continuum_mismatches));
    }
    Outcome {
        passed: mismatches == 0 && checked > 0,
        detail: format!(
            "{checked} lattice crossings, {mismatches} without continuum crossing (crossings/mismatches per run: {})",
            parts.join(", ")
        ),
    }
}

fn c9() -> Outcome {
    let dense = multitype(&config("multitype_dense.json")).expect("dense run");
    let dilute = multitype(&config("multitype_dilute.json")).expect("dilute run");
    let ok_dense = dense.dominance.mean > 0.8;
    let ok_dilute = (dilute.dominance.mean - 0.5).abs() < 0.1;
    Outcome {
        passed: ok_dense && ok_dilute,
        detail: format!(
            "zpiR0^2=4: D={:.4}±{:.4} (snapshot mean {:.4}), >0.8={ok_dense}; zpiR0^2=0.05: D={:.4}±{:.4} (snapshot mean {:.4}), |D-0.5|<0.1={ok_dilute}",
            dense.dominance.mean,
            dense.dominance.se,
            dense.snapshot_dominance.mean,
            dilute.dominance.mean,
            dilute.dominance.se,
            dilute.snapshot_dominance.mean
        ),
    }
}

/// Every file under `dir` except the timestamped sidecar.
fn outputs(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .expect("output dir")
        .map(|e| e.expect("entry").path())
        .filter(|p| p.file_name().is_some_and(|n| n != "meta.json"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect()
}

fn small_config(dir: &Path, name: &str, edit: impl FnOnce(&mut serde_json::Value)) -> PathBuf {
    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(configs_dir().join(name)).unwrap()).unwrap();
    edit(&mut v);
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    path
}

fn run_cli(args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_quermass"))
        .args(args)
        .output()
        .expect("binary runs")
        .status
        .success()
}

fn c10() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let t = tmp.path();
    let sample = small_config(t, "boolean_sample.json", |v| v["chain"]["nSteps"] = 20_000.into());
    let sweep_cfg = small_config(t, "boolean_sweep.json", |v| {
        v["chain"]["nReplicas"] = 4.into();
        v["chain"]["nSteps"] = 4000.into();
    });
    let multi = small_config(t, "multitype_dense.json", |v| {
        v["chain"]["nReplicas"] = 3.into();
        v["chain"]["nSteps"] = 20_000.into();
        v["chain"]["burnIn"] = 10_000.into();
        v["chain"]["thinning"] = 1000.into();
    });
    let perc = small_config(t, "percolate.json", |v| {
        v["chain"]["nReplicas"] = 2.into();
        v["chain"]["nSteps"] = 4000.into();
    });
    let cases: Vec<(&str, Vec<String>)> = vec![
        ("sample", vec!["--config".into(), sample.display().to_string(), "sample".into()]),
        ("sweep", vec!["--config".into(), sweep_cfg.display().to_string(), "sweep".into()]),
        ("multitype", vec!["--config".into(), multi.display().to_string(), "multitype".into()]),
        ("percolate", vec!["--config".into(), perc.display().to_string(), "percolate".into()]),
        ("validate", vec!["validate".into(), "--scale".into(), "0.02".into()]),
    ];
    let mut same = Vec::new();
    let mut passed = true;
    for (name, args) in &cases {
        let mut runs = Vec::new();
        for (k, threads) in ["1", "2"].iter().enumerate() {
            let out = t.join(format!("{name}_{k}"));
            let mut a: Vec<&str> = args.iter().map(String::as_str).collect();
            let out_s = out.display().to_string();
            a.extend(["--out", &out_s, "--threads", threads]);
            if !run_cli(&a) {
                passed = false;
                same.push(format!("{name}: command failed"));
                continue;
            }
            runs.push(outputs(&out));
        }
        if runs.len() == 2 {
            let ok = runs[0] == runs[1] && !runs[0].is_empty();
            passed &= ok;
            same.push(format!("{name}: {} files {}", runs[0].len(), if ok { "identical" } else { "DIFFER" }));
        }
    }
    Outcome {
        passed,
        detail: format!("two runs each, 1 vs 2 threads: {}", same.join(", ")),
    }
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 10] = [
        (1, "kernel-oracle agreement", c1),
        (2, "incremental identity", c2),
        (3, "local change bounds", c3),
        (4, "perimeter bound and hole distances", c4),
        (5, "Poisson reduction", c5),
        (6, "intensity sandwich", c6),
        (7, "percolation trend", c7),
        (8, "lattice crossing implies continuum crossing", c8),
        (9, "multi-type dominance", c9),
        (10, "determinism", c10),
    ];
    let only: Option<Vec<u32>> = std::env::var("QUERMASS_ACCEPTANCE")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let strict = std::env::var_os("QUERMASS_ACCEPTANCE_STRICT").is_some();
    let mut unexpected = Vec::new();
    for (id, name, run) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let secs = start.elapsed().as_secs_f64();
        let known = KNOWN_FAILURES.contains(&id);
        let tag = match (o.passed, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("criterion {id:>2} {tag}: {name} [{secs:.1}s] {}", o.detail);
        if !o.passed && (strict || !known) {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
