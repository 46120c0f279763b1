use serde::{Deserialize, Serialize};

use super::disk::{MarkedPoint, Rect, GEOM_REL_TOL};
use crate::error::{Error, Result};

/// Radius bounds `0 < r0 <= r1` shared by every disk of a configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusBounds {
    pub r0: f64,
    pub r1: f64,
}

impl RadiusBounds {
    pub fn new(r0: f64, r1: f64) -> Result<Self> {
        if !(r0 > 0.0 && r0.is_finite() && r1.is_finite() && r0 <= r1) {
            return Err(Error::InvalidParams(format!(
                "radius bounds need 0 < r0 <= r1, got r0={r0}, r1={r1}"
            )));
        }
        Ok(Self { r0, r1 })
    }

    /// Absolute geometric tolerance used for tangency and zero-length arcs.
    pub fn eps(&self) -> f64 {
        GEOM_REL_TOL * self.r0
    }
}

/// Upper bound on grid cells; very fine cells over a large window fall back
/// to coarser ones.
const MAX_CELLS: f64 = (1u64 << 20) as f64;

#[derive(Clone, Debug)]
struct Grid {
    x0: f64,
    y0: f64,
    cell: f64,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<u32>>,
}

impl Grid {
    fn new(window: &Rect, r1: f64) -> Self {
        let min_cell = (window.area() / MAX_CELLS).sqrt();
        let cell = (2.0 * r1).max(min_cell).max(f64::MIN_POSITIVE);
        let nx = ((window.width() / cell).floor() as usize + 1).max(1);
        let ny = ((window.height() / cell).floor() as usize + 1).max(1);
        Self {
            x0: window.x0,
            y0: window.y0,
            cell,
            nx,
            ny,
            cells: vec![Vec::new(); nx * ny],
        }
    }

    #[inline]
    fn coord(&self, v: f64, origin: f64, n: usize) -> isize {
        let c = ((v - origin) / self.cell).floor();
        c.clamp(-1.0, n as f64) as isize
    }

    #[inline]
    fn cell_of(&self, x: f64, y: f64) -> usize {
        let i = self.coord(x, self.x0, self.nx).clamp(0, self.nx as isize - 1) as usize;
        let j = self.coord(y, self.y0, self.ny).clamp(0, self.ny as isize - 1) as usize;
        j * self.nx + i
    }

    fn insert(&mut self, x: f64, y: f64, id: u32) {
        let c = self.cell_of(x, y);
        self.cells[c].push(id);
    }

    fn remove(&mut self, x: f64, y: f64, id: u32) {
        let c = self.cell_of(x, y);
        let cell = &mut self.cells[c];
        if let Some(pos) = cell.iter().position(|&v| v == id) {
            cell.swap_remove(pos);
        }
    }

    fn relabel(&mut self, x: f64, y: f64, from: u32, to: u32) {
        let c = self.cell_of(x, y);
        if let Some(slot) = self.cells[c].iter_mut().find(|v| **v == from) {
            *slot = to;
        }
    }

    fn for_each_candidate(&self, x: f64, y: f64, radius: f64, mut f: impl FnMut(u32)) {
        let i0 = self.coord(x - radius, self.x0, self.nx).max(0);
        let i1 = self.coord(x + radius, self.x0, self.nx).min(self.nx as isize - 1);
        let j0 = self.coord(y - radius, self.y0, self.ny).max(0);
        let j1 = self.coord(y + radius, self.y0, self.ny).min(self.ny as isize - 1);
        for j in j0..=j1 {
            for i in i0..=i1 {
                for &id in &self.cells[j as usize * self.nx + i as usize] {
                    f(id);
                }
            }
        }
    }
}

/// A finite set of marked points with germs inside a rectangular window,
/// indexed by a uniform grid with cells of side at least `2 r1`.
///
/// Each point also carries a type label (0 for single-type models).
#[derive(Clone, Debug)]
pub struct Configuration {
    window: Rect,
    bounds: RadiusBounds,
    points: Vec<MarkedPoint>,
    labels: Vec<u16>,
    grid: Grid,
}

impl Configuration {
    pub fn new(window: Rect, bounds: RadiusBounds) -> Result<Self> {
        if !window.is_valid() {
            return Err(Error::InvalidParams(format!("invalid window {window:?}")));
        }
        let grid = Grid::new(&window, bounds.r1);
        Ok(Self {
            window,
            bounds,
            points: Vec::new(),
            labels: Vec::new(),
            grid,
        })
    }

    pub fn with_points(
        window: Rect,
        bounds: RadiusBounds,
        points: impl IntoIterator<Item = MarkedPoint>,
    ) -> Result<Self> {
        let mut cfg = Self::new(window, bounds)?;
        for p in points {
            cfg.insert(p)?;
        }
        Ok(cfg)
    }

    /// Builds a configuration whose window is the germs' bounding box and
    /// whose radius bounds are the observed extremes.
    pub fn from_points(points: &[MarkedPoint]) -> Result<Self> {
        if points.is_empty() {
            return Self::new(Rect::new(0.0, 0.0, 0.0, 0.0), RadiusBounds::new(1.0, 1.0)?);
        }
        let mut w = Rect::new(f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        let (mut r0, mut r1) = (f64::INFINITY, 0.0f64);
        for p in points {
            w.x0 = w.x0.min(p.x);
            w.y0 = w.y0.min(p.y);
            w.x1 = w.x1.max(p.x);
            w.y1 = w.y1.max(p.y);
            r0 = r0.min(p.r);
            r1 = r1.max(p.r);
        }
        Self::with_points(w, RadiusBounds::new(r0, r1)?, points.iter().copied())
    }

    pub fn window(&self) -> Rect {
        self.window
    }

    pub fn bounds(&self) -> RadiusBounds {
        self.bounds
    }

    pub fn eps(&self) -> f64 {
        self.bounds.eps()
    }

    pub fn points(&self) -> &[MarkedPoint] {
        &self.points
    }

    pub fn labels(&self) -> &[u16] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn get(&self, i: usize) -> MarkedPoint {
        self.points[i]
    }

    pub fn label(&self, i: usize) -> u16 {
        self.labels[i]
    }

    fn check(&self, p: &MarkedPoint) -> Result<()> {
        let bad = |reason| Error::InvalidPoint {
            x: p.x,
            y: p.y,
            r: p.r,
            reason,
        };
        if !(p.x.is_finite() && p.y.is_finite() && p.r.is_finite()) {
            return Err(bad("non-finite coordinate"));
        }
        if !self.window.contains(p.x, p.y) {
            return Err(bad("germ outside window"));
        }
        if p.r < self.bounds.r0 || p.r > self.bounds.r1 {
            return Err(bad("radius outside [r0, r1]"));
        }
        Ok(())
    }

    pub fn insert(&mut self, p: MarkedPoint) -> Result<usize> {
        self.insert_labeled(p, 0)
    }

    pub fn insert_labeled(&mut self, p: MarkedPoint, label: u16) -> Result<usize> {
        self.check(&p)?;
        let id = self.points.len();
        self.grid.insert(p.x, p.y, id as u32);
        self.points.push(p);
        self.labels.push(label);
        Ok(id)
    }

    /// Removes point `i`; the last point takes its index.
    pub fn remove(&mut self, i: usize) -> (MarkedPoint, u16) {
        let p = self.points[i];
        let last = self.points.len() - 1;
        self.grid.remove(p.x, p.y, i as u32);
        if i != last {
            let q = self.points[last];
            self.grid.relabel(q.x, q.y, last as u32, i as u32);
        }
        let label = self.labels.swap_remove(i);
        self.points.swap_remove(i);
        (p, label)
    }

    /// Exchanges the indices of points `i` and `j`.
    pub fn swap(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        let (a, b) = (self.points[i], self.points[j]);
        self.grid.relabel(a.x, a.y, i as u32, j as u32);
        self.grid.relabel(b.x, b.y, j as u32, i as u32);
        self.points.swap(i, j);
        self.labels.swap(i, j);
    }

    /// Moves the germ of point `i`, keeping its radius and label.
    pub fn move_germ(&mut self, i: usize, x: f64, y: f64) -> Result<()> {
        let old = self.points[i];
        let new = MarkedPoint::new(x, y, old.r);
        self.check(&new)?;
        self.grid.remove(old.x, old.y, i as u32);
        self.grid.insert(x, y, i as u32);
        self.points[i] = new;
        Ok(())
    }

    /// Calls `f` with the index of every point whose germ lies within
    /// distance `radius` (closed) of `(x, y)`.
    pub fn for_each_near(&self, x: f64, y: f64, radius: f64, mut f: impl FnMut(usize)) {
        let r2 = radius * radius;
        self.grid.for_each_candidate(x, y, radius, |id| {
            let p = &self.points[id as usize];
            let dx = p.x - x;
            let dy = p.y - y;
            if dx * dx + dy * dy <= r2 {
                f(id as usize);
            }
        });
    }

    pub fn near(&self, x: f64, y: f64, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_near(x, y, radius, |i| out.push(i));
        out
    }

    /// Points whose germs lie in the closed rectangle `rect`, with the same
    /// window and bounds.
    pub fn restrict(&self, rect: &Rect) -> Configuration {
        self.filter(|p| rect.contains(p.x, p.y))
    }

    pub fn filter(&self, mut keep: impl FnMut(&MarkedPoint) -> bool) -> Configuration {
        let mut out = Self::new(self.window, self.bounds).expect("window already validated");
        for (p, &l) in self.points.iter().zip(&self.labels) {
            if keep(p) {
                out.insert_labeled(*p, l).expect("point already validated");
            }
        }
        out
    }

    /// The same configuration shifted by `(dx, dy)`, window included.
    pub fn translated(&self, dx: f64, dy: f64) -> Configuration {
        let mut out = Self::new(self.window.translate(dx, dy), self.bounds)
            .expect("window already validated");
        for (p, &l) in self.points.iter().zip(&self.labels) {
            out.insert_labeled(p.translated(dx, dy), l)
                .expect("translated point stays in translated window");
        }
        out
    }

    /// Union of two configurations over the smallest window holding both,
    /// with radius bounds widened to cover both.
    pub fn merged(&self, other: &Configuration) -> Configuration {
        let (a, b) = (self.window, other.window);
        let window = Rect::new(a.x0.min(b.x0), a.y0.min(b.y0), a.x1.max(b.x1), a.y1.max(b.y1));
        let bounds = RadiusBounds {
            r0: self.bounds.r0.min(other.bounds.r0),
            r1: self.bounds.r1.max(other.bounds.r1),
        };
        let mut out = Self::new(window, bounds).expect("union of valid windows");
        for cfg in [self, other] {
            for (p, &l) in cfg.points.iter().zip(&cfg.labels) {
                out.insert_labeled(*p, l).expect("point inside union window");
            }
        }
        out
    }

    /// Copy with the window replaced (every germ must lie inside the new one).
    pub fn with_window(&self, window: Rect) -> Result<Configuration> {
        let mut out = Self::new(window, self.bounds)?;
        for (p, &l) in self.points.iter().zip(&self.labels) {
            out.insert_labeled(*p, l)?;
        }
        Ok(out)
    }
}
