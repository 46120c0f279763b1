//! Runs the property corpus at a reduced size and prints one line per property.
//!
//! `cargo run --release --example validate_properties -- 1.0` runs it at full size.

use quermass::validation::{validate, ValidateOptions};

fn main() {
    let scale: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.1);
    let report = validate(&ValidateOptions::default().scaled(scale));
    for p in &report.properties {
        println!(
            "{:<32} {:?} checked={} skipped={} violations={} {}",
            p.name, p.status, p.checked, p.skipped, p.violations, p.detail
        );
    }
    println!("overall: {}", if report.passed { "pass" } else { "fail" });
}
