//! A small activity sweep of the Boolean model with matched replica seeds.

use quermass::experiments::{sweep, ExperimentConfig};

const CONFIG: &str = r#"{
  "model": {"theta": [0, 0, 0], "z": 0.2, "r0": 1, "r1": 1},
  "window": [0, 0, 20, 20],
  "chain": {"nSteps": 5000, "burnIn": 0, "thinning": 500, "nReplicas": 8, "poissonInit": true},
  "sweep": {"parameter": "z", "values": [0.15, 0.3, 0.5]},
  "seed": 1
}"#;

fn main() -> quermass::Result<()> {
    let cfg = ExperimentConfig::parse(CONFIG, "inline")?;
    for p in sweep(&cfg)?.points {
        println!(
            "z = {:.2} (eta = {:.2}): mean n {:.1}, crossing {:.3} ± {:.3}",
            p.value,
            p.value * std::f64::consts::PI,
            p.mean_n_mean,
            p.crossing_frequency_mean,
            p.crossing_frequency_se
        );
    }
    Ok(())
}
