use serde::{Deserialize, Serialize};

use super::arcs::{arcs_from_covers, boundary_arcs, collect_covers, round_euler, uncovered_arcs, Arc};
use super::config::Configuration;
use super::disk::{MarkedPoint, Rect};
use super::union_find::UnionFind;
use crate::error::{degenerate, Error, Result};

/// Area, perimeter and Euler characteristic of a disk union, with the
/// component and hole counts behind the latter.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Functionals {
    pub area: f64,
    pub perimeter: f64,
    pub euler: i64,
    pub components: usize,
    pub holes: usize,
}

/// Field-wise change of [`Functionals`] when one disk is added.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FunctionalDelta {
    pub d_area: f64,
    pub d_perimeter: f64,
    pub d_euler: i64,
    pub d_components: i64,
    pub d_holes: i64,
}

impl std::ops::Sub for Functionals {
    type Output = FunctionalDelta;

    fn sub(self, rhs: Functionals) -> FunctionalDelta {
        FunctionalDelta {
            d_area: self.area - rhs.area,
            d_perimeter: self.perimeter - rhs.perimeter,
            d_euler: self.euler - rhs.euler,
            d_components: self.components as i64 - rhs.components as i64,
            d_holes: self.holes as i64 - rhs.holes as i64,
        }
    }
}

/// Interaction weights of the Quermass energy
/// `θ1·area + θ2·perimeter + θ3·euler`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Theta {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
}

impl Theta {
    pub const ZERO: Theta = Theta::new(0.0, 0.0, 0.0);

    pub const fn new(theta1: f64, theta2: f64, theta3: f64) -> Self {
        Self {
            theta1,
            theta2,
            theta3,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.theta1 == 0.0 && self.theta2 == 0.0 && self.theta3 == 0.0
    }

    pub fn energy(&self, area: f64, perimeter: f64, euler: i64) -> f64 {
        // Skip zero weights so that 0·∞ never shows up.
        let mut e = 0.0;
        if self.theta1 != 0.0 {
            e += self.theta1 * area;
        }
        if self.theta2 != 0.0 {
            e += self.theta2 * perimeter;
        }
        if self.theta3 != 0.0 {
            e += self.theta3 * euler as f64;
        }
        e
    }
}

/// Labels points by connected component of the union (strict overlap),
/// numbered by each component's smallest point index. Returns the labels
/// and the component count.
pub fn component_labels(config: &Configuration) -> (Vec<usize>, usize) {
    let mut uf = overlap_union_find(config);
    let n = uf.set_count();
    (uf.labels(), n)
}

pub(crate) fn overlap_union_find(config: &Configuration) -> UnionFind {
    let pts = config.points();
    let r1 = config.bounds().r1;
    let mut uf = UnionFind::new(pts.len());
    for (i, p) in pts.iter().enumerate() {
        config.for_each_near(p.x, p.y, p.r + r1, |j| {
            if j > i && p.overlaps(&pts[j]) {
                uf.union(i, j);
            }
        });
    }
    uf
}

/// Exact Minkowski functionals of the union of the disks in `config`.
pub fn functionals(config: &Configuration) -> Result<Functionals> {
    if config.is_empty() {
        return Ok(Functionals::default());
    }
    let arr = boundary_arcs(config)?;
    let disks = config.points();
    let (cx, cy) = config.window().center();
    let area = arr.area(disks, [cx, cy]);
    let perimeter = arr.perimeter(disks);
    let components = overlap_union_find(config).set_count();
    let loops = arr.loop_count();
    if loops < components {
        return Err(degenerate(format!("{loops} boundary loops for {components} components")));
    }
    let holes = loops - components;
    Ok(Functionals {
        area,
        perimeter,
        euler: components as i64 - holes as i64,
        components,
        holes,
    })
}

/// Convenience wrapper over a bare slice of disks.
pub fn functionals_of(disks: &[MarkedPoint]) -> Result<Functionals> {
    functionals(&Configuration::from_points(disks)?)
}

/// Local part of a delta: everything that depends only on the disks near the
/// added one.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LocalDelta {
    pub d_area: f64,
    pub d_perimeter: f64,
    pub d_euler: i64,
}

impl LocalDelta {
    pub fn energy(&self, theta: &Theta) -> f64 {
        theta.energy(self.d_area, self.d_perimeter, self.d_euler)
    }
}

#[derive(Default)]
struct ArcSums {
    area: f64,
    length: f64,
    turning: f64,
}

impl ArcSums {
    fn add(&mut self, arcs: &[Arc], disks: &[MarkedPoint], origin: [f64; 2], sign: f64) {
        for a in arcs {
            self.area += sign * a.green_area(disks, origin);
            self.length += sign * a.length(disks);
            self.turning += sign * a.turning(disks);
        }
    }
}

/// Area, perimeter and Euler-characteristic change when `p` is added to a
/// union whose disks near `p` are exactly `near`.
///
/// `near` must contain every disk with germ within `p.r + 3·r1` of `p`
/// (`r1` the largest radius). Only arcs of `p` and of the disks overlapping
/// it change; the Euler change comes from the Gauss–Bonnet sum over those
/// arcs and their corners.
pub fn local_delta(p: &MarkedPoint, near: &[MarkedPoint], eps: f64) -> Result<LocalDelta> {
    let mut disks = Vec::with_capacity(near.len() + 1);
    disks.extend_from_slice(near);
    disks.push(*p);
    let me = near.len();
    let origin = [p.x, p.y];
    let mut sums = ArcSums::default();
    let mut arcs = Vec::with_capacity(16);
    let mut covers = Vec::with_capacity(near.len());

    uncovered_arcs(me, &disks, 0..near.len(), eps, &mut arcs)?;
    sums.add(&arcs, &disks, origin, 1.0);

    for (j, q) in near.iter().enumerate() {
        let s = p.r + q.r + eps;
        if p.dist2(q) >= s * s {
            continue;
        }
        covers.clear();
        if !collect_covers(j, &disks, 0..near.len(), eps, &mut covers)? {
            continue;
        }
        arcs.clear();
        arcs_from_covers(j, &disks, &covers, eps, &mut arcs)?;
        sums.add(&arcs, &disks, origin, -1.0);
        // Adding p's own cover last reproduces the scan over all disks.
        if !collect_covers(j, &disks, [me], eps, &mut covers)? {
            continue;
        }
        arcs.clear();
        arcs_from_covers(j, &disks, &covers, eps, &mut arcs)?;
        sums.add(&arcs, &disks, origin, 1.0);
    }

    Ok(LocalDelta {
        d_area: sums.area,
        d_perimeter: sums.length,
        d_euler: round_euler(sums.turning)?,
    })
}

/// Radius of the neighbourhood that [`local_delta`] needs around a disk of
/// radius `r` when the largest radius is `r1`.
pub fn local_radius(r: f64, r1: f64) -> f64 {
    r + 3.0 * r1
}

fn check_point(p: &MarkedPoint) -> Result<()> {
    if !(p.x.is_finite() && p.y.is_finite() && p.r.is_finite() && p.r > 0.0) {
        return Err(Error::InvalidPoint {
            x: p.x,
            y: p.y,
            r: p.r,
            reason: "needs finite coordinates and positive radius",
        });
    }
    Ok(())
}

fn gather_near(p: &MarkedPoint, config: &Configuration) -> (Vec<MarkedPoint>, Vec<usize>) {
    let r1 = config.bounds().r1.max(p.r);
    let idx = config.near(p.x, p.y, local_radius(p.r, r1) + config.eps());
    (idx.iter().map(|&i| config.get(i)).collect(), idx)
}

/// `functionals(config ∪ p) − functionals(config)`, computed incrementally.
pub fn delta_functionals(p: &MarkedPoint, config: &Configuration) -> Result<FunctionalDelta> {
    check_point(p)?;
    let (near, idx) = gather_near(p, config);
    let local = local_delta(p, &near, config.eps())?;

    let mut uf = overlap_union_find(config);
    let mut roots: Vec<usize> = idx
        .iter()
        .zip(&near)
        .filter(|(_, q)| p.overlaps(q))
        .map(|(&i, _)| uf.find(i))
        .collect();
    roots.sort_unstable();
    roots.dedup();
    let d_components = 1 - roots.len() as i64;
    Ok(FunctionalDelta {
        d_area: local.d_area,
        d_perimeter: local.d_perimeter,
        d_euler: local.d_euler,
        d_components,
        d_holes: d_components - local.d_euler,
    })
}

/// Local energy `h(p, ω) = θ1·ΔA + θ2·ΔL + θ3·Δχ` of adding `p`.
pub fn local_energy(p: &MarkedPoint, config: &Configuration, theta: &Theta) -> Result<f64> {
    check_point(p)?;
    if theta.is_zero() {
        return Ok(0.0);
    }
    let (near, _) = gather_near(p, config);
    Ok(local_delta(p, &near, config.eps())?.energy(theta))
}

/// Energy `θ1·A + θ2·L + θ3·χ` of the whole union.
pub fn energy(config: &Configuration, theta: &Theta) -> Result<f64> {
    let f = functionals(config)?;
    Ok(theta.energy(f.area, f.perimeter, f.euler))
}

/// Energy inside `region`: `H(ω_Δ) − H(ω_{Δ∖region})` with `Δ` the region
/// grown by `2·r1`; points are selected by germ location and never clipped.
pub fn energy_in(region: &Rect, config: &Configuration, theta: &Theta) -> Result<f64> {
    let big = region.expand(2.0 * config.bounds().r1);
    let inner = config.filter(|p| big.contains(p.x, p.y));
    let outer = inner.filter(|p| !region.contains(p.x, p.y));
    Ok(energy(&inner, theta)? - energy(&outer, theta)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfg(points: &[MarkedPoint]) -> Configuration {
        let window = Rect::new(-10.0, -10.0, 10.0, 10.0);
        Configuration::with_points(
            window,
            super::super::RadiusBounds::new(0.5, 2.0).unwrap(),
            points.iter().copied(),
        )
        .unwrap()
    }

    fn triangle(s: f64) -> Vec<MarkedPoint> {
        vec![
            MarkedPoint::new(0.0, 0.0, 1.0),
            MarkedPoint::new(s, 0.0, 1.0),
            MarkedPoint::new(0.5 * s, 0.5 * 3f64.sqrt() * s, 1.0),
        ]
    }

    /// Ring of `n` unit disks on a circle of radius `rho`.
    fn ring(n: usize, rho: f64) -> Vec<MarkedPoint> {
        (0..n)
            .map(|k| {
                let t = k as f64 * std::f64::consts::TAU / n as f64;
                MarkedPoint::new(rho * t.cos(), rho * t.sin(), 1.0)
            })
            .collect()
    }

    #[test]
    fn empty_is_zero() {
        assert_eq!(functionals(&cfg(&[])).unwrap(), Functionals::default());
    }

    #[test]
    fn single_disk() {
        let f = functionals(&cfg(&[MarkedPoint::new(1.0, 2.0, 1.0)])).unwrap();
        assert!((f.area - PI).abs() < 1e-12);
        assert!((f.perimeter - 2.0 * PI).abs() < 1e-12);
        assert_eq!((f.euler, f.components, f.holes), (1, 1, 0));
    }

    #[test]
    fn two_unit_disks_lens() {
        let f = functionals(&cfg(&[MarkedPoint::new(0.0, 0.0, 1.0), MarkedPoint::new(1.0, 0.0, 1.0)]))
            .unwrap();
        // Lens area 2R²·acos(d/2R) − (d/2)·sqrt(4R² − d²).
        let lens = 2.0 * (0.5f64).acos() - 0.5 * 3f64.sqrt();
        assert!((f.area - (2.0 * PI - lens)).abs() < 1e-12);
        assert!((f.area - 5.054816).abs() < 1e-6);
        assert!((f.perimeter - 8.0 * PI / 3.0).abs() < 1e-12);
        assert_eq!(f.euler, 1);
    }

    #[test]
    fn triangle_has_one_hole() {
        let f = functionals(&cfg(&triangle(1.9))).unwrap();
        assert_eq!((f.components, f.holes, f.euler), (1, 1, 0));
        let g = functionals(&cfg(&triangle(1.5))).unwrap();
        assert_eq!((g.components, g.holes, g.euler), (1, 0, 1));
    }

    #[test]
    fn disjoint_new_disk_delta() {
        let c = cfg(&[MarkedPoint::new(0.0, 0.0, 1.0)]);
        let d = delta_functionals(&MarkedPoint::new(5.0, 0.0, 1.0), &c).unwrap();
        assert!((d.d_area - PI).abs() < 1e-12);
        assert!((d.d_perimeter - 2.0 * PI).abs() < 1e-12);
        assert_eq!((d.d_euler, d.d_components, d.d_holes), (1, 1, 0));
    }

    #[test]
    fn covered_new_disk_delta_is_zero() {
        let c = cfg(&[MarkedPoint::new(0.0, 0.0, 2.0)]);
        let d = delta_functionals(&MarkedPoint::new(0.2, 0.1, 1.0), &c).unwrap();
        assert!(d.d_area.abs() < 1e-12 && d.d_perimeter.abs() < 1e-12);
        assert_eq!((d.d_euler, d.d_components, d.d_holes), (0, 0, 0));
    }

    #[test]
    fn closing_a_c_shaped_chain_creates_a_hole() {
        let full = ring(6, 1.8);
        let (last, chain) = full.split_last().unwrap();
        let c = cfg(chain);
        let d = delta_functionals(last, &c).unwrap();
        assert_eq!((d.d_holes, d.d_components, d.d_euler), (1, 0, -1));
        let before = functionals(&c).unwrap();
        let after = functionals(&cfg(&full)).unwrap();
        let r = after - before;
        assert_eq!((r.d_euler, r.d_components, r.d_holes), (d.d_euler, d.d_components, d.d_holes));
        assert!((r.d_area - d.d_area).abs() < 1e-12);
        assert!((r.d_perimeter - d.d_perimeter).abs() < 1e-12);
    }

    #[test]
    fn local_energy_examples() {
        let c = cfg(&[MarkedPoint::new(0.0, 0.0, 1.0)]);
        let far = MarkedPoint::new(5.0, 0.0, 1.0);
        assert!((local_energy(&far, &c, &Theta::new(1.0, 0.0, 0.0)).unwrap() - PI).abs() < 1e-12);
        assert_eq!(local_energy(&far, &c, &Theta::ZERO).unwrap(), 0.0);
        // A bridge between two separate disks merges two components.
        let two = cfg(&[MarkedPoint::new(0.0, 0.0, 1.0), MarkedPoint::new(3.0, 0.0, 1.0)]);
        let bridge = MarkedPoint::new(1.5, 0.0, 1.0);
        assert_eq!(local_energy(&bridge, &two, &Theta::new(0.0, 0.0, 1.0)).unwrap(), -1.0);
    }

    #[test]
    fn energy_in_examples() {
        let theta = Theta::new(1.0, 0.5, 2.0);
        let region = Rect::new(0.0, 0.0, 4.0, 4.0);
        // Nothing in the region: zero, whatever lies outside.
        let outside = cfg(&[MarkedPoint::new(-1.0, 2.0, 1.5), MarkedPoint::new(6.0, 6.0, 1.0)]);
        assert_eq!(energy_in(&region, &outside, &theta).unwrap(), 0.0);
        // Everything inside, θ = (1, 0, 0): area of the union.
        let inside = cfg(&[MarkedPoint::new(1.0, 1.0, 1.0), MarkedPoint::new(2.0, 1.0, 1.0)]);
        let a = functionals(&inside).unwrap().area;
        let e = energy_in(&region, &inside, &Theta::new(1.0, 0.0, 0.0)).unwrap();
        assert!((e - a).abs() < 1e-12);
        // A disk straddling the region's edge counts in full.
        let straddle = cfg(&[MarkedPoint::new(3.8, 2.0, 1.0)]);
        let e = energy_in(&region, &straddle, &theta).unwrap();
        assert!((e - (PI + 0.5 * 2.0 * PI + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn gauss_bonnet_matches_loops() {
        for pts in [triangle(1.9), triangle(1.5), ring(8, 2.5), ring(7, 1.7)] {
            let c = cfg(&pts);
            let f = functionals(&c).unwrap();
            let arr = boundary_arcs(&c).unwrap();
            assert_eq!(arr.gauss_bonnet_euler(c.points()).unwrap(), f.euler);
        }
    }
}
