//! Connectivity of disk unions: components, window crossings and the
//! diamond-box site field that turns continuum percolation into site
//! percolation on the lattice `(6ℓ ℤ)²`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{component_labels, Configuration, MarkedPoint, Rect, UnionFind};

/// Accepted numerical value of the site percolation threshold on ℤ².
/// Reported for comparison only.
pub const SITE_THRESHOLD_Z2: f64 = 0.592746;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Horizontal,
    Vertical,
}

/// Component label of every point (numbered by smallest point index) and
/// the component count.
pub fn components(config: &Configuration) -> (Vec<usize>, usize) {
    component_labels(config)
}

/// Size of the largest component, in points.
pub fn largest_component(config: &Configuration) -> usize {
    let (labels, n) = component_labels(config);
    let mut sizes = vec![0; n];
    for l in labels {
        sizes[l] += 1;
    }
    sizes.into_iter().max().unwrap_or(0)
}

/// Whether one component touches both window edges across `direction`.
/// A disk touches an edge when its germ is within `r` of it.
pub fn crossing(config: &Configuration, window: &Rect, direction: Direction) -> bool {
    match direction {
        Direction::Horizontal => crossing_between(config, direction, window.x0, window.x1),
        Direction::Vertical => crossing_between(config, direction, window.y0, window.y1),
    }
}

/// Whether one component meets both lines `x = lo` and `x = hi`
/// (`y = ...` for vertical).
pub fn crossing_between(config: &Configuration, direction: Direction, lo: f64, hi: f64) -> bool {
    let coord = |p: &MarkedPoint| match direction {
        Direction::Horizontal => p.x,
        Direction::Vertical => p.y,
    };
    let (labels, n) = component_labels(config);
    let mut low = vec![false; n];
    let mut high = vec![false; n];
    for (p, &l) in config.points().iter().zip(&labels) {
        let c = coord(p);
        low[l] |= (c - lo).abs() <= p.r;
        high[l] |= (c - hi).abs() <= p.r;
    }
    low.iter().zip(&high).any(|(&a, &b)| a && b)
}

/// Octagon Δ and cardinal boxes of side `ell`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiamondGeometry {
    pub ell: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cardinal {
    North,
    South,
    East,
    West,
}

impl Cardinal {
    pub const ALL: [Cardinal; 4] = [Cardinal::North, Cardinal::South, Cardinal::East, Cardinal::West];
}

impl DiamondGeometry {
    /// Requires `ell > 2·r1 + 2·r0`.
    pub fn new(ell: f64, r0: f64, r1: f64) -> Result<Self> {
        if !(ell.is_finite() && ell > 2.0 * r1 + 2.0 * r0) {
            return Err(Error::InvalidParams(format!(
                "diamond side {ell} must exceed 2·r1 + 2·r0 = {}",
                2.0 * r1 + 2.0 * r0
            )));
        }
        Ok(Self { ell })
    }

    /// Lattice spacing `6ℓ`.
    pub fn spacing(&self) -> f64 {
        6.0 * self.ell
    }

    /// Vertices of the octagon at the origin site, counter-clockwise.
    pub fn octagon(&self) -> [[f64; 2]; 8] {
        let l = self.ell;
        [
            [3.0 * l, 0.0],
            [6.0 * l, 0.0],
            [9.0 * l, 3.0 * l],
            [9.0 * l, 6.0 * l],
            [6.0 * l, 9.0 * l],
            [3.0 * l, 9.0 * l],
            [0.0, 6.0 * l],
            [0.0, 3.0 * l],
        ]
    }

    /// Whether `(x, y)` lies in the open octagon of the origin site.
    pub fn in_octagon(&self, x: f64, y: f64) -> bool {
        let l = self.ell;
        x > 0.0
            && x < 9.0 * l
            && y > 0.0
            && y < 9.0 * l
            && x + y > 3.0 * l
            && x + y < 15.0 * l
            && (x - y).abs() < 6.0 * l
    }

    /// Cardinal box of the origin site.
    pub fn cardinal_box(&self, c: Cardinal) -> Rect {
        let l = self.ell;
        let (x, y) = match c {
            Cardinal::North => (4.0 * l, 7.0 * l),
            Cardinal::South => (4.0 * l, l),
            Cardinal::East => (7.0 * l, 4.0 * l),
            Cardinal::West => (l, 4.0 * l),
        };
        Rect::new(x, y, x + l, y + l)
    }

    /// Lower-left corner of site `(i, j)`.
    pub fn site_origin(&self, i: i64, j: i64) -> [f64; 2] {
        [self.spacing() * i as f64, self.spacing() * j as f64]
    }

    /// Bounding square of the octagon of site `(i, j)`.
    pub fn site_extent(&self, i: i64, j: i64) -> Rect {
        let [x, y] = self.site_origin(i, j);
        Rect::new(x, y, x + 9.0 * self.ell, y + 9.0 * self.ell)
    }
}

/// Site variable ξ at lattice site `(i, j)`: 1 iff every cardinal box holds
/// a germ of ω_Δ and exactly one component of the union of ω_Δ contains
/// disks with germs in the cardinal boxes.
pub fn xi(config: &Configuration, site: (i64, i64), geom: &DiamondGeometry) -> bool {
    let [ox, oy] = geom.site_origin(site.0, site.1);
    let l = geom.ell;
    let (cx, cy) = (ox + 4.5 * l, oy + 4.5 * l);
    let mut local: Vec<MarkedPoint> = Vec::new();
    config.for_each_near(cx, cy, 4.5 * l * std::f64::consts::SQRT_2, |i| {
        let p = config.get(i);
        if geom.in_octagon(p.x - ox, p.y - oy) {
            local.push(p);
        }
    });
    local.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    let boxes = Cardinal::ALL.map(|c| geom.cardinal_box(c).translate(ox, oy));
    let in_box: Vec<bool> = local
        .iter()
        .map(|p| boxes.iter().any(|b| b.contains(p.x, p.y)))
        .collect();
    if !boxes
        .iter()
        .all(|b| local.iter().any(|p| b.contains(p.x, p.y)))
    {
        return false;
    }
    let mut uf = UnionFind::new(local.len());
    for i in 0..local.len() {
        for j in i + 1..local.len() {
            if local[j].x - local[i].x >= local[i].r + local[j].r {
                break;
            }
            if local[i].overlaps(&local[j]) {
                uf.union(i, j);
            }
        }
    }
    let mut roots: Vec<usize> = (0..local.len())
        .filter(|&i| in_box[i])
        .map(|i| uf.find(i))
        .collect();
    roots.sort_unstable();
    roots.dedup();
    roots.len() == 1
}

/// ξ on the rectangle of sites whose octagons fit in a window.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteField {
    pub ell: f64,
    /// Lattice coordinates of the lower-left site.
    pub i0: i64,
    pub j0: i64,
    pub ni: usize,
    pub nj: usize,
    /// Row-major (`j` outer) site values.
    pub values: Vec<bool>,
}

impl SiteField {
    /// A field from explicit values, e.g. for Bernoulli tests.
    pub fn from_values(ell: f64, ni: usize, nj: usize, values: Vec<bool>) -> Result<Self> {
        if ni == 0 || nj == 0 || values.len() != ni * nj {
            return Err(Error::InvalidParams("site field shape mismatch".into()));
        }
        Ok(Self {
            ell,
            i0: 0,
            j0: 0,
            ni,
            nj,
            values,
        })
    }

    pub fn get(&self, a: usize, b: usize) -> bool {
        self.values[b * self.ni + a]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Rows `i,j,xi` with lattice coordinates.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "i,j,xi")?;
        for b in 0..self.nj {
            for a in 0..self.ni {
                writeln!(
                    out,
                    "{},{},{}",
                    self.i0 + a as i64,
                    self.j0 + b as i64,
                    u8::from(self.get(a, b))
                )?;
            }
        }
        Ok(())
    }

    /// Open clusters under nearest-neighbour adjacency, as site indices.
    fn clusters(&self) -> UnionFind {
        let mut uf = UnionFind::new(self.len());
        for b in 0..self.nj {
            for a in 0..self.ni {
                if !self.get(a, b) {
                    continue;
                }
                let k = b * self.ni + a;
                if a + 1 < self.ni && self.get(a + 1, b) {
                    uf.union(k, k + 1);
                }
                if b + 1 < self.nj && self.get(a, b + 1) {
                    uf.union(k, k + self.ni);
                }
            }
        }
        uf
    }

    /// Whether an open cluster joins the first and last columns.
    pub fn lattice_crossing(&self) -> bool {
        let mut uf = self.clusters();
        let mut left: Vec<usize> = (0..self.nj)
            .filter(|&b| self.get(0, b))
            .map(|b| uf.find(b * self.ni))
            .collect();
        left.sort_unstable();
        (0..self.nj)
            .filter(|&b| self.get(self.ni - 1, b))
            .any(|b| left.binary_search(&uf.find(b * self.ni + self.ni - 1)).is_ok())
    }
}

/// Evaluates ξ at every site whose octagon lies inside the window of
/// `config`.
pub fn site_field(config: &Configuration, geom: &DiamondGeometry) -> Result<SiteField> {
    let w = config.window();
    let s = geom.spacing();
    let span = 9.0 * geom.ell;
    let fits = |v: f64, lo: f64, hi: f64| lo <= v && v + span <= hi;
    let range = |lo: f64, hi: f64| {
        let (mut a, mut b) = ((lo / s).ceil() as i64, ((hi - span) / s).floor() as i64);
        // Correct for rounding at the window edge.
        while a <= b && !fits(s * a as f64, lo, hi) {
            a += 1;
        }
        while b >= a && !fits(s * b as f64, lo, hi) {
            b -= 1;
        }
        (a, b)
    };
    let (i0, i1) = range(w.x0, w.x1);
    let (j0, j1) = range(w.y0, w.y1);
    if i1 < i0 || j1 < j0 {
        return Err(Error::WindowTooSmall);
    }
    let (ni, nj) = ((i1 - i0 + 1) as usize, (j1 - j0 + 1) as usize);
    let mut values = Vec::with_capacity(ni * nj);
    for j in j0..=j1 {
        for i in i0..=i1 {
            values.push(xi(config, (i, j), geom));
        }
    }
    Ok(SiteField {
        ell: geom.ell,
        i0,
        j0,
        ni,
        nj,
        values,
    })
}

/// Site-percolation statistics of a field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SiteSummary {
    pub p_hat: f64,
    pub lattice_crossing: bool,
    pub largest_site_cluster: usize,
    pub n_sites: usize,
    /// [`SITE_THRESHOLD_Z2`], for comparison with `p_hat`.
    pub p_star: f64,
}

pub fn site_percolation_summary(field: &SiteField) -> SiteSummary {
    let open = field.values.iter().filter(|&&v| v).count();
    let mut uf = field.clusters();
    let largest = (0..field.len())
        .filter(|&k| field.values[k])
        .map(|k| uf.set_size(k))
        .max()
        .unwrap_or(0);
    SiteSummary {
        p_hat: open as f64 / field.len() as f64,
        lattice_crossing: field.lattice_crossing(),
        largest_site_cluster: largest,
        n_sites: field.len(),
        p_star: SITE_THRESHOLD_Z2,
    }
}

/// When the field has a left–right lattice crossing, whether the continuum
/// configuration has a component meeting the line through the west boxes
/// of the first column and the line through the east boxes of the last.
/// `None` without a lattice crossing.
///
/// Adjacent open sites share a cardinal box, so an open crossing cluster
/// forces one component from a west-box germ of the first column to an
/// east-box germ of the last.
pub fn continuum_crossing_for_field(config: &Configuration, field: &SiteField) -> Option<bool> {
    if !field.lattice_crossing() {
        return None;
    }
    let s = 6.0 * field.ell;
    let lo = s * field.i0 as f64 + 2.0 * field.ell;
    let hi = s * (field.i0 + field.ni as i64 - 1) as f64 + 7.0 * field.ell;
    Some(crossing_between(config, Direction::Horizontal, lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RadiusBounds;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg(window: Rect, pts: &[MarkedPoint]) -> Configuration {
        Configuration::with_points(window, RadiusBounds::new(1.0, 1.0).unwrap(), pts.iter().copied()).unwrap()
    }

    #[test]
    fn component_examples() {
        let w = Rect::square(20.0);
        assert_eq!(components(&cfg(w, &[])).1, 0);
        let two = [MarkedPoint::new(2.0, 2.0, 1.0), MarkedPoint::new(6.0, 2.0, 1.0)];
        assert_eq!(components(&cfg(w, &two)).1, 2);
        let chain: Vec<_> = (0..8).map(|k| MarkedPoint::new(1.0 + 1.5 * k as f64, 5.0, 1.0)).collect();
        assert_eq!(components(&cfg(w, &chain)).1, 1);
    }

    #[test]
    fn crossing_examples() {
        let w = Rect::square(10.0);
        let chain: Vec<_> = (0..7).map(|k| MarkedPoint::new(0.5 + 1.5 * k as f64, 5.0, 1.0)).collect();
        let c = cfg(w, &chain);
        assert!(crossing(&c, &w, Direction::Horizontal));
        assert!(!crossing(&c, &w, Direction::Vertical));
        let single = cfg(w, &[MarkedPoint::new(5.0, 5.0, 1.0)]);
        assert!(!crossing(&single, &w, Direction::Horizontal));
    }

    #[test]
    fn boxes_lie_in_octagon() {
        let g = DiamondGeometry::new(5.0, 1.0, 1.0).unwrap();
        for c in Cardinal::ALL {
            let b = g.cardinal_box(c);
            for (x, y) in [(b.x0, b.y0), (b.x1, b.y0), (b.x0, b.y1), (b.x1, b.y1)] {
                assert!(g.in_octagon(x, y), "{c:?} corner ({x}, {y})");
            }
        }
        assert!(DiamondGeometry::new(4.0, 1.0, 1.0).is_err());
        assert!(!g.in_octagon(0.5, 0.5));
        assert!(!g.in_octagon(0.0, 20.0));
    }

    /// Disks along the two axes of the octagon through all four boxes.
    fn cross_config(g: &DiamondGeometry, w: Rect, shift: [f64; 2]) -> Vec<MarkedPoint> {
        let l = g.ell;
        let mut pts = Vec::new();
        let mut t = 1.5 * l;
        while t <= 7.5 * l {
            pts.push(MarkedPoint::new(shift[0] + t, shift[1] + 4.5 * l, 1.0));
            pts.push(MarkedPoint::new(shift[0] + 4.5 * l, shift[1] + t, 1.0));
            t += 1.5;
        }
        pts.retain(|p| w.contains(p.x, p.y));
        pts
    }

    #[test]
    fn xi_examples() {
        let g = DiamondGeometry::new(5.0, 1.0, 1.0).unwrap();
        let w = Rect::square(45.0);
        assert!(!xi(&cfg(w, &[]), (0, 0), &g));
        let c = cfg(w, &cross_config(&g, w, [0.0, 0.0]));
        assert!(xi(&c, (0, 0), &g));
        // One germ per box but no chain: four components.
        let l = g.ell;
        let lone: Vec<_> = Cardinal::ALL
            .iter()
            .map(|&k| {
                let b = g.cardinal_box(k);
                let (x, y) = b.center();
                MarkedPoint::new(x, y, 1.0)
            })
            .collect();
        assert!(!xi(&cfg(w, &lone), (0, 0), &g));
        assert!(lone.iter().all(|p| g.in_octagon(p.x, p.y)) && l > 0.0);
    }

    #[test]
    fn xi_is_translation_covariant_and_local() {
        let g = DiamondGeometry::new(5.0, 1.0, 1.0).unwrap();
        let w = Rect::new(-60.0, -60.0, 90.0, 90.0);
        let s = g.spacing();
        let base = cfg(w, &cross_config(&g, w, [0.0, 0.0]));
        let moved = cfg(w, &cross_config(&g, w, [s, -s]));
        assert!(xi(&base, (0, 0), &g));
        assert!(xi(&moved, (1, -1), &g));
        assert!(!xi(&moved, (0, 0), &g));
        // Far disks do not change ξ.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut pts = cross_config(&g, w, [0.0, 0.0]);
        for _ in 0..200 {
            let p = MarkedPoint::new(rng.random_range(-60.0..90.0), rng.random_range(-60.0..90.0), 1.0);
            if !g.in_octagon(p.x, p.y) {
                pts.push(p);
            }
        }
        assert!(xi(&cfg(w, &pts), (0, 0), &g));
    }

    #[test]
    fn site_field_shape() {
        let g = DiamondGeometry::new(5.0, 1.0, 1.0).unwrap();
        let one = site_field(&cfg(Rect::square(45.0), &[]), &g).unwrap();
        assert_eq!((one.ni, one.nj), (1, 1));
        assert!(one.values.iter().all(|v| !v));
        let many = site_field(&cfg(Rect::square(33.0 * 5.0), &[]), &g).unwrap();
        assert_eq!((many.ni, many.nj), (5, 5));
        assert!(matches!(site_field(&cfg(Rect::square(40.0), &[]), &g), Err(Error::WindowTooSmall)));
    }

    #[test]
    fn summary_examples() {
        let open = SiteField::from_values(5.0, 4, 3, vec![true; 12]).unwrap();
        let s = site_percolation_summary(&open);
        assert_eq!((s.p_hat, s.lattice_crossing, s.largest_site_cluster, s.n_sites), (1.0, true, 12, 12));
        let closed = SiteField::from_values(5.0, 4, 3, vec![false; 12]).unwrap();
        let s = site_percolation_summary(&closed);
        assert_eq!((s.p_hat, s.lattice_crossing, s.largest_site_cluster), (0.0, false, 0));
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.contains("\"pHat\"") && json.contains("\"latticeCrossing\""));
    }

    #[test]
    fn bernoulli_fields_cross_above_threshold() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let hits = (0..100)
            .filter(|_| {
                let v = (0..2500).map(|_| rng.random_bool(0.7)).collect();
                SiteField::from_values(1.0, 50, 50, v).unwrap().lattice_crossing()
            })
            .count();
        assert!(hits > 90, "{hits}");
    }

    #[test]
    fn site_csv() {
        let f = SiteField::from_values(1.0, 2, 1, vec![true, false]).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "i,j,xi\n0,0,1\n1,0,0\n");
    }
}
