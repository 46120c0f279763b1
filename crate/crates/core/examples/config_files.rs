//! Writes a configuration as JSON (with types) and CSV and reads it back.

use quermass::geometry::{Configuration, MarkedPoint, RadiusBounds, Rect};
use quermass::io::{read_config_json, read_points_csv, write_config_json, write_points_csv};

fn main() -> quermass::Result<()> {
    let mut config = Configuration::new(Rect::square(5.0), RadiusBounds::new(0.5, 1.0)?)?;
    config.insert_labeled(MarkedPoint::new(1.0, 1.0, 0.5), 0)?;
    config.insert_labeled(MarkedPoint::new(3.5, 2.25, 0.75), 1)?;

    let mut json = Vec::new();
    write_config_json(&config, true, &mut json)?;
    println!("{}", String::from_utf8_lossy(&json));
    let back = read_config_json(json.as_slice(), None)?;
    assert_eq!(back.points(), config.points());

    let mut csv = Vec::new();
    write_points_csv(&config, &mut csv)?;
    print!("{}", String::from_utf8_lossy(&csv));
    assert_eq!(read_points_csv(csv.as_slice())?, config.points());
    Ok(())
}
