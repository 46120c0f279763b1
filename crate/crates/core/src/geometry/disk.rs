use serde::{Deserialize, Serialize};

/// Relative geometric tolerance; the absolute tolerance is this times `r0`.
pub const GEOM_REL_TOL: f64 = 1e-9;

/// A germ with its radius mark: one closed disk of the germ-grain union.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkedPoint {
    pub x: f64,
    pub y: f64,
    pub r: f64,
}

impl MarkedPoint {
    pub const fn new(x: f64, y: f64, r: f64) -> Self {
        Self { x, y, r }
    }

    #[inline]
    pub fn dist2(&self, other: &MarkedPoint) -> f64 {
        let dx = other.x - self.x;
        let dy = other.y - self.y;
        dx * dx + dy * dy
    }

    #[inline]
    pub fn dist(&self, other: &MarkedPoint) -> f64 {
        self.dist2(other).sqrt()
    }

    /// Strict overlap of the closed disks' interiors: germ distance < r + r'.
    /// Tangent disks do not overlap.
    #[inline]
    pub fn overlaps(&self, other: &MarkedPoint) -> bool {
        let s = self.r + other.r;
        self.dist2(other) < s * s
    }

    #[inline]
    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        let dx = x - self.x;
        let dy = y - self.y;
        dx * dx + dy * dy <= self.r * self.r
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self::new(self.x + dx, self.y + dy, self.r)
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.r * self.r
    }
}

/// Closed axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl From<[f64; 4]> for Rect {
    fn from(v: [f64; 4]) -> Self {
        Rect::new(v[0], v[1], v[2], v[3])
    }
}

impl From<Rect> for [f64; 4] {
    fn from(r: Rect) -> Self {
        [r.x0, r.y0, r.x1, r.y1]
    }
}

impl Rect {
    pub const fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn square(side: f64) -> Self {
        Self::new(0.0, 0.0, side, side)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width().max(0.0) * self.height().max(0.0)
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    #[inline]
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.x0 >= self.x0 && other.x1 <= self.x1 && other.y0 >= self.y0 && other.y1 <= self.y1
    }

    pub fn expand(&self, m: f64) -> Self {
        Self::new(self.x0 - m, self.y0 - m, self.x1 + m, self.y1 + m)
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        Self::new(self.x0 + dx, self.y0 + dy, self.x1 + dx, self.y1 + dy)
    }

    pub fn is_valid(&self) -> bool {
        self.x0.is_finite()
            && self.y0.is_finite()
            && self.x1.is_finite()
            && self.y1.is_finite()
            && self.x1 >= self.x0
            && self.y1 >= self.y0
    }
}

/// Result of intersecting two circles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CircleIntersection {
    None,
    /// Within tolerance of tangency; the kernel treats this as degenerate.
    Tangent([f64; 2]),
    Two([f64; 2], [f64; 2]),
    /// Identical circles (within tolerance).
    Coincident,
}

/// Intersection points of the circles bounding `a` and `b`, using the
/// absolute tolerance `GEOM_REL_TOL * min(r_a, r_b)`.
pub fn circle_intersections(a: &MarkedPoint, b: &MarkedPoint) -> CircleIntersection {
    circle_intersections_tol(a, b, GEOM_REL_TOL * a.r.min(b.r))
}

pub fn circle_intersections_tol(a: &MarkedPoint, b: &MarkedPoint, eps: f64) -> CircleIntersection {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let d = (dx * dx + dy * dy).sqrt();
    if d < eps && (a.r - b.r).abs() < eps {
        return CircleIntersection::Coincident;
    }
    let outer = a.r + b.r;
    let inner = (a.r - b.r).abs();
    if d > outer + eps || d < inner - eps {
        return CircleIntersection::None;
    }
    if (d - outer).abs() <= eps || (d - inner).abs() <= eps {
        // Tangent point along the center line (or its reverse for internal
        // tangency with the larger circle second).
        let (ux, uy) = if d > 0.0 { (dx / d, dy / d) } else { (1.0, 0.0) };
        let s = if (d - outer).abs() <= eps || a.r >= b.r { a.r } else { -a.r };
        return CircleIntersection::Tangent([a.x + s * ux, a.y + s * uy]);
    }
    let t = (a.r * a.r - b.r * b.r + d * d) / (2.0 * d);
    let h = (a.r * a.r - t * t).max(0.0).sqrt();
    let (ux, uy) = (dx / d, dy / d);
    let mx = a.x + t * ux;
    let my = a.y + t * uy;
    CircleIntersection::Two([mx + h * uy, my - h * ux], [mx - h * uy, my + h * ux])
}
