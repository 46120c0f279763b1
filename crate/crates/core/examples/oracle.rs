//! Rasterizes a configuration, compares the pixel estimates with the exact
//! kernel and writes the mask as a plain PBM image.

use quermass::geometry::{functionals, Configuration, MarkedPoint, RadiusBounds, Rect};
use quermass::oracle::{pixel_functionals, rasterize};

fn main() -> quermass::Result<()> {
    let pts = [
        MarkedPoint::new(2.0, 2.0, 1.0),
        MarkedPoint::new(3.6, 2.0, 1.2),
        MarkedPoint::new(2.8, 3.4, 0.9),
        MarkedPoint::new(6.0, 6.0, 1.5),
    ];
    let config = Configuration::with_points(Rect::square(8.0), RadiusBounds::new(0.5, 1.5)?, pts)?;
    let exact = functionals(&config)?;
    let mask = rasterize(&config, 0.5 / 64.0)?;
    let pixel = pixel_functionals(&mask);
    println!("exact: area {:.5}, perimeter {:.5}, euler {}", exact.area, exact.perimeter, exact.euler);
    println!(
        "pixel: area {:.5}, perimeter {:.5}, euler {}, degenerate {}",
        pixel.area, pixel.perimeter_estimate, pixel.euler, pixel.degenerate
    );
    let path = std::env::temp_dir().join("quermass_mask.pbm");
    mask.write_pbm(std::io::BufWriter::new(std::fs::File::create(&path)?))?;
    println!("mask written to {}", path.display());
    Ok(())
}
