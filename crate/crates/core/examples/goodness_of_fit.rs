//! Chi-square and Kolmogorov-Smirnov checks of a θ = 0 chain against the
//! Poisson process it should reproduce.

use quermass::geometry::{Rect, Theta};
use quermass::sampler::{run_chain, Boundary, QuermassParams, RadiusLaw, RunOptions};
use quermass::stats::{chi_square_poisson, ks_test};

fn main() -> quermass::Result<()> {
    let law = RadiusLaw::Uniform { lo: 0.5, hi: 1.0 };
    let params = QuermassParams::new(Theta::ZERO, 1.0, 0.5, 1.0, law.clone())?;
    let mut opts = RunOptions::new(300_000, 9);
    opts.thinning = Some(1000);
    let mut counts = Vec::new();
    let mut radii = Vec::new();
    run_chain(&params, Rect::square(10.0), Boundary::Free, 1, &opts, |state, rec| {
        counts.push(rec.n);
        if rec.step % 5000 == 0 {
            radii.extend(state.config().points().iter().map(|p| p.r));
        }
    })?;
    let chi = chi_square_poisson(&counts, 100.0);
    let ks = ks_test(&radii, |r| law.cdf(r));
    println!("counts: chi-square {:.2} on {} dof, p = {:.3}", chi.statistic, chi.dof, chi.p_value);
    println!("radii: KS D = {:.4} on {} values, p = {:.3}", ks.statistic, ks.dof, ks.p_value);
    Ok(())
}
