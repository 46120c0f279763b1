//! Configuration files: JSON `{"window": [x0,y0,x1,y1], "points": [[x,y,r],...]}`
//! with an optional `"types"` array, and CSV point lists with header `x,y,r`.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Configuration, MarkedPoint, RadiusBounds, Rect};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigFile {
    pub window: [f64; 4],
    pub points: Vec<[f64; 3]>,
    /// Point types `1..=K`, one per point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub types: Option<Vec<u16>>,
}

impl ConfigFile {
    /// Snapshot of `config`; labels `0..K` are written as types `1..=K`
    /// when `with_types` is set.
    pub fn from_config(config: &Configuration, with_types: bool) -> Self {
        Self {
            window: config.window().into(),
            points: config.points().iter().map(|p| [p.x, p.y, p.r]).collect(),
            types: with_types.then(|| config.labels().iter().map(|l| l + 1).collect()),
        }
    }

    /// Builds a configuration; radius bounds default to the smallest and
    /// largest radius present.
    pub fn to_config(&self, bounds: Option<RadiusBounds>) -> Result<Configuration> {
        let window = Rect::from(self.window);
        if !window.is_valid() {
            return Err(Error::Config(format!("invalid window {:?}", self.window)));
        }
        let bounds = match bounds {
            Some(b) => b,
            None if self.points.is_empty() => RadiusBounds::new(1.0, 1.0)?,
            None => {
                let lo = self.points.iter().map(|p| p[2]).fold(f64::INFINITY, f64::min);
                let hi = self.points.iter().map(|p| p[2]).fold(f64::NEG_INFINITY, f64::max);
                RadiusBounds::new(lo, hi)?
            }
        };
        if let Some(t) = &self.types {
            if t.len() != self.points.len() {
                return Err(Error::Config(format!(
                    "{} types for {} points",
                    t.len(),
                    self.points.len()
                )));
            }
            if t.contains(&0) {
                return Err(Error::Config("types are numbered from 1".into()));
            }
        }
        let mut config = Configuration::new(window, bounds)?;
        for (k, p) in self.points.iter().enumerate() {
            let label = self.types.as_ref().map_or(0, |t| t[k] - 1);
            config.insert_labeled(MarkedPoint::new(p[0], p[1], p[2]), label)?;
        }
        Ok(config)
    }
}

pub fn write_config_json(config: &Configuration, with_types: bool, out: impl Write) -> Result<()> {
    serde_json::to_writer_pretty(out, &ConfigFile::from_config(config, with_types))?;
    Ok(())
}

pub fn read_config_json(input: impl Read, bounds: Option<RadiusBounds>) -> Result<Configuration> {
    let file: ConfigFile = serde_json::from_reader(input)?;
    file.to_config(bounds)
}

pub fn load_config_json(path: &Path, bounds: Option<RadiusBounds>) -> Result<Configuration> {
    read_config_json(std::io::BufReader::new(std::fs::File::open(path)?), bounds)
}

#[derive(Serialize, Deserialize)]
struct CsvPoint {
    x: f64,
    y: f64,
    r: f64,
}

pub fn write_points_csv(config: &Configuration, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in config.points() {
        w.serialize(CsvPoint {
            x: p.x,
            y: p.y,
            r: p.r,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_points_csv(input: impl Read) -> Result<Vec<MarkedPoint>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize::<CsvPoint>()
        .map(|row| {
            let p = row?;
            Ok(MarkedPoint::new(p.x, p.y, p.r))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Configuration {
        let mut c = Configuration::new(Rect::square(10.0), RadiusBounds::new(0.5, 1.0).unwrap()).unwrap();
        c.insert_labeled(MarkedPoint::new(1.0 / 3.0, 2.5, 0.75), 0).unwrap();
        c.insert_labeled(MarkedPoint::new(7.0, 0.1, 1.0), 1).unwrap();
        c
    }

    #[test]
    fn json_round_trip_with_types() {
        let c = sample();
        let mut buf = Vec::new();
        write_config_json(&c, true, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("\"types\""));
        let back = read_config_json(&buf[..], Some(c.bounds())).unwrap();
        assert_eq!(back.points(), c.points());
        assert_eq!(back.labels(), c.labels());
        assert_eq!(back.window(), c.window());
    }

    #[test]
    fn json_without_types() {
        let text = r#"{"window": [0, 0, 4, 4], "points": [[1, 1, 0.5], [2, 2, 1.5]]}"#;
        let c = read_config_json(text.as_bytes(), None).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!((c.bounds().r0, c.bounds().r1), (0.5, 1.5));
        assert!(read_config_json(r#"{"window": [0, 0, 4, 4], "points": [[9, 1, 0.5]]}"#.as_bytes(), None).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let c = sample();
        let mut buf = Vec::new();
        write_points_csv(&c, &mut buf).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("x,y,r\n"));
        assert_eq!(read_points_csv(&buf[..]).unwrap(), c.points());
    }
}
