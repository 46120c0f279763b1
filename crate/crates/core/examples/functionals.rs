//! Exact area, perimeter and Euler characteristic of a disk union, and the
//! incremental change when one more disk is added.

use quermass::geometry::{delta_functionals, functionals, Configuration, MarkedPoint, RadiusBounds, Rect};

fn main() -> quermass::Result<()> {
    // Six unit disks on a ring enclose one hole.
    let ring = (0..6).map(|k| {
        let t = k as f64 * std::f64::consts::TAU / 6.0;
        MarkedPoint::new(5.0 + 1.8 * t.cos(), 5.0 + 1.8 * t.sin(), 1.0)
    });
    let config = Configuration::with_points(Rect::square(10.0), RadiusBounds::new(1.0, 1.0)?, ring)?;
    let f = functionals(&config)?;
    println!(
        "ring: area {:.6}, perimeter {:.6}, euler {} ({} component, {} hole)",
        f.area, f.perimeter, f.euler, f.components, f.holes
    );

    // A disk at the centre leaves six small pockets, one per triangle of germs.
    let d = delta_functionals(&MarkedPoint::new(5.0, 5.0, 1.0), &config)?;
    println!(
        "adding the centre disk: dA {:.6}, dL {:.6}, d_euler {}, d_holes {}",
        d.d_area, d.d_perimeter, d.d_euler, d.d_holes
    );
    Ok(())
}
