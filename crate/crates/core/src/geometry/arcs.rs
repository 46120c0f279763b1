//! Boundary arcs of a union of disks.
//!
//! Each disk contributes the part of its circle not covered by the open union
//! of the other disks. Arcs are stored counterclockwise around their own
//! center, which orients every boundary loop with the union on its left:
//! outer loops run counterclockwise and hole loops clockwise.

use std::f64::consts::TAU;

use super::config::Configuration;
use super::disk::MarkedPoint;
use crate::error::{degenerate, Result};

/// One maximal uncovered arc of a disk's circle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arc {
    pub disk: usize,
    /// Start angle in `[0, 2π)`.
    pub start: f64,
    /// Angular measure in `(0, 2π]`.
    pub span: f64,
    /// Disk whose covered interval ends where this arc starts.
    pub from: Option<usize>,
    /// Disk whose covered interval begins where this arc ends.
    pub to: Option<usize>,
}

impl Arc {
    fn full(disk: usize) -> Self {
        Self {
            disk,
            start: 0.0,
            span: TAU,
            from: None,
            to: None,
        }
    }

    pub fn is_full_circle(&self) -> bool {
        self.to.is_none()
    }

    pub fn end(&self) -> f64 {
        self.start + self.span
    }

    pub fn point_at(disk: &MarkedPoint, angle: f64) -> [f64; 2] {
        [disk.x + disk.r * angle.cos(), disk.y + disk.r * angle.sin()]
    }

    pub fn length(&self, disks: &[MarkedPoint]) -> f64 {
        disks[self.disk].r * self.span
    }

    /// `½∮(x dy − y dx)` along the arc, with coordinates taken relative to
    /// `origin`.
    pub fn green_area(&self, disks: &[MarkedPoint], origin: [f64; 2]) -> f64 {
        let c = &disks[self.disk];
        let (cx, cy, r) = (c.x - origin[0], c.y - origin[1], c.r);
        if self.is_full_circle() {
            return 0.5 * r * r * TAU;
        }
        let (a, b) = (self.start, self.end());
        0.5 * (r * r * self.span + r * cx * (b.sin() - a.sin()) - r * cy * (b.cos() - a.cos()))
    }

    /// Geodesic curvature integral of the arc plus the (negative) turning
    /// angle at its end vertex. Summed over all arcs this is `2π χ`.
    pub fn turning(&self, disks: &[MarkedPoint]) -> f64 {
        match self.to {
            None => self.span,
            Some(j) => self.span - corner_angle(&disks[self.disk], &disks[j]),
        }
    }
}

/// Angle between the two radii meeting at an intersection point of the
/// circles of `a` and `b`.
fn corner_angle(a: &MarkedPoint, b: &MarkedPoint) -> f64 {
    let c = (a.r * a.r + b.r * b.r - a.dist2(b)) / (2.0 * a.r * b.r);
    c.clamp(-1.0, 1.0).acos()
}

/// How disk `b` relates to the circle of disk `a`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Relation {
    Apart,
    /// `b` covers the open angular interval `center ± half` of `a`'s circle.
    Crossing { center: f64, half: f64 },
    /// `a` lies inside `b`.
    Inside,
    /// `b` lies inside `a`.
    Contains,
}

pub(crate) fn relation(a: &MarkedPoint, b: &MarkedPoint, eps: f64) -> Result<Relation> {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let d2 = dx * dx + dy * dy;
    let outer = a.r + b.r + eps;
    if d2 >= outer * outer {
        return Ok(Relation::Apart);
    }
    let d = d2.sqrt();
    if (d - (a.r + b.r)).abs() < eps {
        return Err(degenerate(format!("tangent disks {a:?} and {b:?}")));
    }
    if (d - (a.r - b.r).abs()).abs() < eps {
        return Err(degenerate(format!("internally tangent or coincident disks {a:?} and {b:?}")));
    }
    if d + a.r < b.r {
        return Ok(Relation::Inside);
    }
    if d + b.r < a.r {
        return Ok(Relation::Contains);
    }
    let cos_half = (a.r * a.r + d2 - b.r * b.r) / (2.0 * a.r * d);
    Ok(Relation::Crossing {
        center: dy.atan2(dx),
        half: cos_half.clamp(-1.0, 1.0).acos(),
    })
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Cover {
    start: f64,
    width: f64,
    by: usize,
}

#[inline]
fn wrap(a: f64) -> f64 {
    let w = if (0.0..TAU).contains(&a) {
        a
    } else if (-TAU..0.0).contains(&a) {
        a + TAU
    } else if (TAU..2.0 * TAU).contains(&a) {
        a - TAU
    } else {
        a.rem_euclid(TAU)
    };
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Appends to `out` the uncovered arcs of disk `i` given candidate covering
/// disks `others` (indices into `disks`; `i` itself is skipped).
pub(crate) fn uncovered_arcs(
    i: usize,
    disks: &[MarkedPoint],
    others: impl IntoIterator<Item = usize>,
    eps: f64,
    out: &mut Vec<Arc>,
) -> Result<()> {
    let mut covers = Vec::new();
    if collect_covers(i, disks, others, eps, &mut covers)? {
        arcs_from_covers(i, disks, &covers, eps, out)?;
    }
    Ok(())
}

/// Appends the parts of disk `i`'s circle covered by each of `others`.
/// Returns `false`, leaving `covers` partly filled, when disk `i` lies
/// inside one of them.
pub(crate) fn collect_covers(
    i: usize,
    disks: &[MarkedPoint],
    others: impl IntoIterator<Item = usize>,
    eps: f64,
    covers: &mut Vec<Cover>,
) -> Result<bool> {
    let me = &disks[i];
    for j in others {
        if j == i {
            continue;
        }
        match relation(me, &disks[j], eps)? {
            Relation::Apart | Relation::Contains => {}
            Relation::Inside => return Ok(false),
            Relation::Crossing { center, half } => covers.push(Cover {
                start: wrap(center - half),
                width: 2.0 * half,
                by: j,
            }),
        }
    }
    Ok(true)
}

/// Appends the arcs of disk `i`'s circle left uncovered by `covers`.
pub(crate) fn arcs_from_covers(
    i: usize,
    disks: &[MarkedPoint],
    covers: &[Cover],
    eps: f64,
    out: &mut Vec<Arc>,
) -> Result<()> {
    let me = &disks[i];
    if covers.is_empty() {
        out.push(Arc::full(i));
        return Ok(());
    }
    let tol = eps / me.r;
    let first = out.len();
    for (k, ck) in covers.iter().enumerate() {
        let a = wrap(ck.start + ck.width);
        let mut covered = false;
        for (l, cl) in covers.iter().enumerate() {
            if l == k {
                continue;
            }
            let t = wrap(a - cl.start);
            let to_start = t.min(TAU - t);
            let to_end = (t - cl.width).abs();
            if to_start < tol || to_end < tol {
                return Err(degenerate(format!(
                    "coincident boundary vertices on disk {i} (covers by {} and {})",
                    ck.by, cl.by
                )));
            }
            if t < cl.width {
                covered = true;
                break;
            }
        }
        if covered {
            continue;
        }
        let (gap, next) = covers
            .iter()
            .map(|cm| (wrap(cm.start - a), cm.by))
            .min_by(|x, y| x.0.total_cmp(&y.0))
            .expect("covers is non-empty");
        if gap < tol {
            return Err(degenerate(format!("zero-length arc on disk {i}")));
        }
        out.push(Arc {
            disk: i,
            start: a,
            span: gap,
            from: Some(ck.by),
            to: Some(next),
        });
    }
    out[first..].sort_by(|x, y| x.start.total_cmp(&y.start));
    Ok(())
}

/// Uncovered arcs of every disk plus the loop structure linking them.
#[derive(Clone, Debug, Default)]
pub struct ArcArrangement {
    pub arcs: Vec<Arc>,
    /// `disk_start[i]..disk_start[i + 1]` indexes the arcs of disk `i`.
    pub disk_start: Vec<usize>,
    /// Index of the arc following each arc along its loop.
    pub next: Vec<usize>,
    /// Closed boundary curves as cyclic sequences of arc indices.
    pub loops: Vec<Vec<usize>>,
}

impl ArcArrangement {
    pub fn arcs_of(&self, disk: usize) -> &[Arc] {
        &self.arcs[self.disk_start[disk]..self.disk_start[disk + 1]]
    }

    pub fn loop_count(&self) -> usize {
        self.loops.len()
    }

    /// Circle–circle intersection points on the union boundary (one per arc
    /// end that is not a full circle).
    pub fn vertices(&self, disks: &[MarkedPoint]) -> Vec<[f64; 2]> {
        self.arcs
            .iter()
            .filter(|a| !a.is_full_circle())
            .map(|a| Arc::point_at(&disks[a.disk], a.end()))
            .collect()
    }

    pub fn perimeter(&self, disks: &[MarkedPoint]) -> f64 {
        self.arcs.iter().map(|a| a.length(disks)).sum()
    }

    pub fn area(&self, disks: &[MarkedPoint], origin: [f64; 2]) -> f64 {
        self.arcs.iter().map(|a| a.green_area(disks, origin)).sum()
    }

    /// Euler characteristic from the Gauss–Bonnet sum over arcs and corners.
    pub fn gauss_bonnet_euler(&self, disks: &[MarkedPoint]) -> Result<i64> {
        let total: f64 = self.arcs.iter().map(|a| a.turning(disks)).sum();
        round_euler(total)
    }
}

pub(crate) fn round_euler(total_turning: f64) -> Result<i64> {
    let x = total_turning / TAU;
    let k = x.round();
    if (x - k).abs() > 1e-6 {
        return Err(degenerate(format!("Gauss-Bonnet sum {x} is not an integer")));
    }
    Ok(k as i64)
}

/// Computes the arc arrangement of the disks in `config`.
pub fn boundary_arcs(config: &Configuration) -> Result<ArcArrangement> {
    let disks = config.points();
    let eps = config.eps();
    let r1 = config.bounds().r1;
    let mut arcs = Vec::new();
    let mut disk_start = Vec::with_capacity(disks.len() + 1);
    let mut scratch = Vec::new();
    for (i, p) in disks.iter().enumerate() {
        disk_start.push(arcs.len());
        scratch.clear();
        config.for_each_near(p.x, p.y, p.r + r1 + eps, |j| scratch.push(j));
        uncovered_arcs(i, disks, scratch.iter().copied(), eps, &mut arcs)?;
    }
    disk_start.push(arcs.len());
    link_loops(arcs, disk_start)
}

fn link_loops(arcs: Vec<Arc>, disk_start: Vec<usize>) -> Result<ArcArrangement> {
    let n = arcs.len();
    let mut next = vec![usize::MAX; n];
    let mut has_pred = vec![false; n];
    for (k, a) in arcs.iter().enumerate() {
        let Some(j) = a.to else {
            next[k] = k;
            has_pred[k] = true;
            continue;
        };
        let range = disk_start[j]..disk_start[j + 1];
        let succ = range
            .clone()
            .find(|&m| arcs[m].from == Some(a.disk))
            .ok_or_else(|| {
                degenerate(format!("arc of disk {} has no continuation on disk {j}", a.disk))
            })?;
        if has_pred[succ] {
            return Err(degenerate(format!("two arcs continue into disk {j}")));
        }
        has_pred[succ] = true;
        next[k] = succ;
    }
    let mut seen = vec![false; n];
    let mut loops = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut k = s;
        while !seen[k] {
            seen[k] = true;
            cycle.push(k);
            k = next[k];
        }
        if k != s {
            return Err(degenerate("boundary walk did not close"));
        }
        loops.push(cycle);
    }
    Ok(ArcArrangement {
        arcs,
        disk_start,
        next,
        loops,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn arrangement(points: &[MarkedPoint]) -> ArcArrangement {
        boundary_arcs(&Configuration::from_points(points).unwrap()).unwrap()
    }

    #[test]
    fn single_disk_is_one_full_arc() {
        let arr = arrangement(&[MarkedPoint::new(0.0, 0.0, 1.0)]);
        assert_eq!(arr.arcs.len(), 1);
        assert!(arr.arcs[0].is_full_circle());
        assert_eq!(arr.loop_count(), 1);
    }

    #[test]
    fn two_unit_disks_at_distance_one() {
        let arr = arrangement(&[MarkedPoint::new(0.0, 0.0, 1.0), MarkedPoint::new(1.0, 0.0, 1.0)]);
        assert_eq!(arr.arcs.len(), 2);
        for a in &arr.arcs {
            assert!((a.span - 4.0 * PI / 3.0).abs() < 1e-12, "span {}", a.span);
        }
        assert_eq!(arr.loop_count(), 1);
        assert_eq!(arr.vertices(&[MarkedPoint::new(0.0, 0.0, 1.0), MarkedPoint::new(1.0, 0.0, 1.0)]).len(), 2);
    }

    #[test]
    fn equilateral_triangle_has_inner_loop() {
        let s = 1.9;
        let pts = [
            MarkedPoint::new(0.0, 0.0, 1.0),
            MarkedPoint::new(s, 0.0, 1.0),
            MarkedPoint::new(0.5 * s, 0.5 * 3f64.sqrt() * s, 1.0),
        ];
        let arr = arrangement(&pts);
        assert_eq!(arr.arcs.len(), 6);
        assert_eq!(arr.loop_count(), 2);
        assert_eq!(arr.gauss_bonnet_euler(&pts).unwrap(), 0);
    }

    #[test]
    fn swallowed_disk_contributes_nothing() {
        let pts = [MarkedPoint::new(0.0, 0.0, 2.0), MarkedPoint::new(0.3, 0.0, 1.0)];
        let arr = arrangement(&pts);
        assert_eq!(arr.arcs_of(1).len(), 0);
        assert_eq!(arr.arcs_of(0).len(), 1);
    }

    #[test]
    fn tangency_is_degenerate() {
        let pts = [MarkedPoint::new(0.0, 0.0, 1.0), MarkedPoint::new(2.0, 0.0, 1.0)];
        let cfg = Configuration::from_points(&pts).unwrap();
        assert!(matches!(boundary_arcs(&cfg), Err(crate::Error::DegenerateGeometry(_))));
    }

    #[test]
    fn arcs_of_one_circle_are_disjoint() {
        // Five disks crossing a central one at spread angles.
        let mut pts = vec![MarkedPoint::new(0.0, 0.0, 1.0)];
        for k in 0..5 {
            let t = k as f64 * 1.3;
            pts.push(MarkedPoint::new(1.4 * t.cos(), 1.4 * t.sin(), 0.6));
        }
        let arr = arrangement(&pts);
        let arcs = arr.arcs_of(0);
        for w in arcs.windows(2) {
            assert!(w[0].end() <= w[1].start + 1e-12);
        }
        if let (Some(f), Some(l)) = (arcs.first(), arcs.last()) {
            assert!(l.end() <= f.start + TAU + 1e-12);
        }
    }
}
