//! Runs the birth-death-translate sampler for a Quermass model and prints
//! averages of the recorded functionals.

use quermass::geometry::{Rect, Theta};
use quermass::sampler::{run_chain, Boundary, QuermassParams, RadiusLaw, RunOptions};

fn main() -> quermass::Result<()> {
    let params = QuermassParams::new(
        Theta::new(0.2, 0.1, -0.5),
        1.0,
        0.5,
        1.0,
        RadiusLaw::Uniform { lo: 0.5, hi: 1.0 },
    )?;
    let mut opts = RunOptions::new(100_000, 42);
    opts.poisson_init = true;
    let (records, state) = run_chain(&params, Rect::square(10.0), Boundary::Free, 1, &opts, |_, _| {})?;
    let mean = |f: fn(&quermass::sampler::TraceRecord) -> f64| records.iter().map(f).sum::<f64>() / records.len() as f64;
    println!("{} records", records.len());
    println!("mean n {:.2} (Poisson reference {:.1})", mean(|r| r.n as f64), params.z * 100.0);
    println!("mean area {:.3}, perimeter {:.3}, euler {:.3}", mean(|r| r.area), mean(|r| r.perimeter), mean(|r| r.euler as f64));
    let s = state.stats();
    println!("accepted birth/death/translate: {:?} of {:?}", s.accepted, s.proposed);
    Ok(())
}
