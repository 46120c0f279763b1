//! Continuum crossing, the diamond site variables and the site-percolation
//! summary of a dense Boolean sample.

use quermass::geometry::Rect;
use quermass::percolation::{
    continuum_crossing_for_field, crossing, largest_component, site_field, site_percolation_summary,
    DiamondGeometry, Direction,
};
use quermass::sampler::{ChainState, Boundary, QuermassParams, chain_rng};

fn main() -> quermass::Result<()> {
    let params = QuermassParams::boolean(3.0, 0.5)?;
    let window = Rect::square(40.0);
    let mut state = ChainState::new(params, window, Boundary::Free, 1, chain_rng(8, 0))?;
    state.poisson_init()?;
    let config = state.config();
    println!("{} disks, largest component {}", config.len(), largest_component(config));
    println!("left-right crossing: {}", crossing(config, &window, Direction::Horizontal));

    let geom = DiamondGeometry::new(2.2, 0.5, 0.5)?;
    let field = site_field(config, &geom)?;
    let s = site_percolation_summary(&field);
    println!(
        "{} sites, pHat {:.3} (p* = {}), lattice crossing {}, largest cluster {}",
        s.n_sites, s.p_hat, s.p_star, s.lattice_crossing, s.largest_site_cluster
    );
    println!("continuum crossing over the field's extent: {:?}", continuum_crossing_for_field(config, &field));
    field.write_csv(std::io::stdout().lock())?;
    Ok(())
}
