//! The same model under free, periodic and frozen-outside boundaries.

use quermass::geometry::{Configuration, MarkedPoint, Rect, Theta};
use quermass::sampler::{run_chain, Boundary, QuermassParams, RadiusLaw, RunOptions};

fn main() -> quermass::Result<()> {
    let params = QuermassParams::new(Theta::new(0.3, 0.0, 0.0), 1.0, 0.5, 0.5, RadiusLaw::Fixed { r: 0.5 })?;
    let window = Rect::square(8.0);

    // Frozen disks along the bottom edge, germs just outside the window.
    let frame = (0..16).map(|k| MarkedPoint::new(0.25 + 0.5 * k as f64, -0.2, 0.5));
    let outside = Configuration::with_points(Rect::new(-1.0, -1.0, 9.0, 9.0), params.bounds(), frame)?;

    for (name, boundary) in [
        ("free", Boundary::Free),
        ("periodic", Boundary::Periodic),
        ("fixed outside", Boundary::FixedOutside(outside)),
    ] {
        let (records, _) = run_chain(&params, window, boundary, 1, &RunOptions::new(60_000, 1), |_, _| {})?;
        let mean_n = records.iter().map(|r| r.n as f64).sum::<f64>() / records.len() as f64;
        println!("{name:>14}: mean n {mean_n:.2}");
    }
    Ok(())
}
