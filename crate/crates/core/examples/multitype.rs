//! Two-type hardcore model: disks of different types may not overlap. At
//! high activity one type takes over the window.

use quermass::geometry::{Rect, Theta};
use quermass::sampler::{hardcore_violation, run_chain, Boundary, QuermassParams, RadiusLaw, RunOptions};

fn main() -> quermass::Result<()> {
    for z in [0.05, 1.0] {
        let params = QuermassParams::new(Theta::ZERO, z, 1.0, 1.0, RadiusLaw::Fixed { r: 1.0 })?;
        let mut opts = RunOptions::new(200_000, 3);
        opts.thinning = Some(2000);
        let (records, state) = run_chain(&params, Rect::square(16.0), Boundary::Free, 2, &opts, |_, _| {})?;
        assert!(hardcore_violation(state.config()).is_none());
        let last = records.last().expect("records");
        let d = last.type_counts.iter().max().copied().unwrap_or(0) as f64 / last.n.max(1) as f64;
        println!("z = {z}: final type counts {:?}, dominance {d:.3}", last.type_counts);
    }
    Ok(())
}
