//! Pixel-grid reference implementation of the union's functionals.
//!
//! The oracle never looks at arcs: it samples coverage at cell centers and
//! counts components and holes by flood fill over the resulting mask, so it
//! gives an independent check of the exact kernel. Masks are stored
//! run-length encoded per row, which keeps fine grids cheap.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Configuration, MarkedPoint, UnionFind};

/// Cells per `r0` used when no resolution is requested.
pub const DEFAULT_CELLS_PER_R0: f64 = 64.0;

/// Features at most this many cells wide make a mask degenerate.
pub const THIN_CELLS: f64 = 2.0;

/// Chebyshev reach, in cells, of the pocket merge in [`PixelMask::holes`].
const REACH: u32 = 2;

/// Half-open range `[start, end)` of cell columns within one row.
pub type Run = (u32, u32);

/// Cells as `(row, run)` pairs.
pub type Cells = Vec<(usize, Run)>;

/// Coverage mask of a disk union on a square grid with an empty border.
///
/// Cell `(i, j)` is covered iff its center lies in some closed disk.
#[derive(Clone, Debug)]
pub struct PixelMask {
    /// Lower-left corner of cell `(0, 0)`.
    pub origin: [f64; 2],
    pub delta: f64,
    pub nx: usize,
    pub ny: usize,
    /// Covered cells of each row as sorted, disjoint, non-touching runs.
    pub rows: Vec<Vec<Run>>,
    /// Width of the thinnest gap, neck or hole of the union (capped at a few
    /// cells). Features this thin may be lost by the grid.
    pub thinnest_feature: f64,
    disks: Vec<MarkedPoint>,
}

impl PixelMask {
    pub fn get(&self, i: usize, j: usize) -> bool {
        let i = i as u32;
        self.rows[j].iter().any(|&(s, e)| s <= i && i < e)
    }

    pub fn cell_center(&self, i: usize, j: usize) -> [f64; 2] {
        [
            self.origin[0] + (i as f64 + 0.5) * self.delta,
            self.origin[1] + (j as f64 + 0.5) * self.delta,
        ]
    }

    pub fn covered_cells(&self) -> usize {
        count(&self.rows)
    }

    pub fn padding_is_empty(&self) -> bool {
        self.rows[0].is_empty()
            && self.rows[self.ny - 1].is_empty()
            && self
                .rows
                .iter()
                .all(|r| r.iter().all(|&(s, e)| s > 0 && (e as usize) < self.nx))
    }

    /// Plain PBM (`P1`) image, top row first, `1` = covered.
    pub fn write_pbm(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "P1")?;
        writeln!(out, "{} {}", self.nx, self.ny)?;
        for row in self.rows.iter().rev() {
            let mut line = vec!["0"; self.nx];
            for &(s, e) in row {
                line[s as usize..e as usize].fill("1");
            }
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }

    /// Empty cells of each row as runs (the complement of `rows`).
    pub fn empty_rows(&self) -> Vec<Vec<Run>> {
        let nx = self.nx as u32;
        self.rows
            .iter()
            .map(|row| {
                let mut out = Vec::with_capacity(row.len() + 1);
                let mut at = 0;
                for &(s, e) in row {
                    if s > at {
                        out.push((at, s));
                    }
                    at = e;
                }
                if at < nx {
                    out.push((at, nx));
                }
                out
            })
            .collect()
    }

    /// Covered cells with at least one uncovered 8-neighbour.
    pub fn boundary_cells(&self) -> usize {
        self.covered_cells() - count(&erode(&self.rows))
    }

    /// 8-connected components of covered cells, ordered by first cell.
    pub fn components(&self) -> Vec<Cells> {
        let (ids, mut uf) = connect(&self.rows, true);
        group(&self.rows, &ids, &mut uf).into_iter().map(|(_, c)| c).collect()
    }

    /// Bounded 4-connected components of empty cells.
    ///
    /// The tip of a concave corner where two circles cross is narrower than
    /// a cell and can leave a few empty cells cut off from the rest by a
    /// wall one cell thick. A component that vanishes under a one-cell
    /// erosion is merged with every empty cell within two cells of it.
    pub fn holes(&self) -> Vec<Cells> {
        self.hole_components().into_iter().map(|(c, _)| c).collect()
    }

    /// Holes with a flag telling whether each survives a one-cell erosion.
    pub fn hole_components(&self) -> Vec<(Cells, bool)> {
        let empty = self.empty_rows();
        let (ids, mut uf) = connect(&empty, false);
        let mut thick = vec![false; uf.len()];
        for (j, eroded) in erode(&empty).iter().enumerate() {
            let mut k = 0;
            for &(s, e) in eroded {
                while !(empty[j][k].0 <= s && e <= empty[j][k].1) {
                    k += 1;
                }
                let root = uf.find(ids[j] + k);
                thick[root] = true;
            }
        }
        let mut merges = Vec::new();
        for j in 0..self.ny {
            for (a, &(s, e)) in empty[j].iter().enumerate() {
                let x = ids[j] + a;
                let rx = uf.find(x);
                if thick[rx] {
                    continue;
                }
                for j2 in j.saturating_sub(REACH as usize)..(j + 1 + REACH as usize).min(self.ny) {
                    for (b, &(s2, e2)) in empty[j2].iter().enumerate() {
                        if s2 < e + REACH && s < e2 + REACH {
                            merges.push((x, ids[j2] + b));
                        }
                    }
                }
            }
        }
        for (x, y) in merges {
            let thick_union = thick[uf.find(x)] || thick[uf.find(y)];
            uf.union(x, y);
            let root = uf.find(x);
            thick[root] = thick_union;
        }
        // Row 0 is padding: its single run belongs to the outside.
        let outside = uf.find(ids[0]);
        group(&empty, &ids, &mut uf)
            .into_iter()
            .filter(|&(root, _)| root != outside)
            .map(|(root, c)| (c, thick[root]))
            .collect()
    }
}

fn count(rows: &[Vec<Run>]) -> usize {
    rows.iter().flatten().map(|&(s, e)| (e - s) as usize).sum()
}

fn intersect(a: &[Run], b: &[Run]) -> Vec<Run> {
    let (mut i, mut k) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && k < b.len() {
        let s = a[i].0.max(b[k].0);
        let e = a[i].1.min(b[k].1);
        if s < e {
            out.push((s, e));
        }
        if a[i].1 < b[k].1 {
            i += 1;
        } else {
            k += 1;
        }
    }
    out
}

/// Cells whose 3×3 neighbourhood lies entirely in the runs. Runs of a row
/// must not touch.
fn erode(rows: &[Vec<Run>]) -> Vec<Vec<Run>> {
    let shrunk: Vec<Vec<Run>> = rows
        .iter()
        .map(|row| {
            row.iter()
                .filter(|&&(s, e)| e >= s + 3)
                .map(|&(s, e)| (s + 1, e - 1))
                .collect()
        })
        .collect();
    (0..rows.len())
        .map(|j| {
            if j == 0 || j + 1 == rows.len() {
                Vec::new()
            } else {
                intersect(&intersect(&shrunk[j - 1], &shrunk[j]), &shrunk[j + 1])
            }
        })
        .collect()
}

/// Union-find over runs: 8-connectivity when `diagonal`, else 4. Returns the
/// id of each row's first run and the forest.
fn connect(rows: &[Vec<Run>], diagonal: bool) -> (Vec<usize>, UnionFind) {
    let mut ids = Vec::with_capacity(rows.len() + 1);
    let mut total = 0;
    for r in rows {
        ids.push(total);
        total += r.len();
    }
    ids.push(total);
    let mut uf = UnionFind::new(total);
    let slack = u32::from(diagonal);
    for j in 0..rows.len().saturating_sub(1) {
        let (up, down) = (&rows[j], &rows[j + 1]);
        let (mut a, mut b) = (0, 0);
        while a < up.len() && b < down.len() {
            let (s, e) = up[a];
            let (s2, e2) = down[b];
            if s2 < e + slack && s < e2 + slack {
                uf.union(ids[j] + a, ids[j + 1] + b);
            }
            if e < e2 {
                a += 1;
            } else {
                b += 1;
            }
        }
    }
    (ids, uf)
}

fn group(rows: &[Vec<Run>], ids: &[usize], uf: &mut UnionFind) -> Vec<(usize, Cells)> {
    let mut slot = vec![usize::MAX; uf.len()];
    let mut out: Vec<(usize, Cells)> = Vec::new();
    for (j, row) in rows.iter().enumerate() {
        for (k, &run) in row.iter().enumerate() {
            let root = uf.find(ids[j] + k);
            if slot[root] == usize::MAX {
                slot[root] = out.len();
                out.push((root, Vec::new()));
            }
            out[slot[root]].1.push((j, run));
        }
    }
    out
}

/// Rasterizes the union of `config`'s disks at cell size `delta`.
pub fn rasterize(config: &Configuration, delta: f64) -> Result<PixelMask> {
    rasterize_disks(config.points(), config.bounds().r0, delta)
}

/// Rasterizes a bare disk list; `r0` sets the coarsest admissible `delta`.
pub fn rasterize_disks(disks: &[MarkedPoint], r0: f64, delta: f64) -> Result<PixelMask> {
    if !(delta > 0.0) || delta > r0 / 8.0 {
        return Err(Error::ResolutionTooCoarse {
            delta,
            limit: r0 / 8.0,
        });
    }
    if disks.is_empty() {
        return Ok(PixelMask {
            origin: [0.0, 0.0],
            delta,
            nx: 3,
            ny: 3,
            rows: vec![Vec::new(); 3],
            thinnest_feature: f64::INFINITY,
            disks: Vec::new(),
        });
    }
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for d in disks {
        x0 = x0.min(d.x - d.r);
        y0 = y0.min(d.y - d.r);
        x1 = x1.max(d.x + d.r);
        y1 = y1.max(d.y + d.r);
    }
    let origin = [x0 - 2.0 * delta, y0 - 2.0 * delta];
    let nx = ((x1 - x0) / delta).ceil() as usize + 4;
    let ny = ((y1 - y0) / delta).ceil() as usize + 4;
    let mut rows = vec![Vec::new(); ny];
    for d in disks {
        let j0 = ((d.y - d.r - origin[1]) / delta - 0.5).ceil().max(0.0) as usize;
        let j1 = (((d.y + d.r - origin[1]) / delta - 0.5).floor().max(0.0) as usize).min(ny - 1);
        for (j, row) in rows.iter_mut().enumerate().take(j1 + 1).skip(j0) {
            let dy = origin[1] + (j as f64 + 0.5) * delta - d.y;
            let h2 = d.r * d.r - dy * dy;
            if h2 < 0.0 {
                continue;
            }
            let h = h2.sqrt();
            let i0 = ((d.x - h - origin[0]) / delta - 0.5).ceil();
            let i1 = ((d.x + h - origin[0]) / delta - 0.5).floor();
            if i1 >= i0 {
                row.push((i0.max(0.0) as u32, (i1 as u32 + 1).min(nx as u32)));
            }
        }
    }
    for row in &mut rows {
        row.sort_unstable();
        let mut merged: Vec<Run> = Vec::with_capacity(row.len());
        for &(s, e) in row.iter() {
            match merged.last_mut() {
                Some(last) if s <= last.1 => last.1 = last.1.max(e),
                _ => merged.push((s, e)),
            }
        }
        *row = merged;
    }
    Ok(PixelMask {
        origin,
        delta,
        nx,
        ny,
        rows,
        thinnest_feature: thinnest_feature(disks, 4.0 * delta),
        disks: disks.to_vec(),
    })
}

/// Width of the thinnest topologically relevant feature, capped at `cap`:
///
/// * the gap between two disjoint disks,
/// * the half-chord of the neck joining two crossing disks,
/// * the distance from a crossing vertex to a third disk that crosses both
///   circles from the other side, which bounds a small hole.
///
/// Near-contacts buried deeper than `cap` inside another disk are ignored.
fn thinnest_feature(disks: &[MarkedPoint], cap: f64) -> f64 {
    let buried = |px: f64, py: f64, skip: [usize; 3]| {
        disks.iter().enumerate().any(|(l, c)| {
            !skip.contains(&l) && ((px - c.x).powi(2) + (py - c.y).powi(2)).sqrt() < c.r - cap
        })
    };
    let mut best = cap;
    for (i, a) in disks.iter().enumerate() {
        for (j, b) in disks.iter().enumerate().skip(i + 1) {
            let d = a.dist(b);
            if d > a.r + b.r + cap || d <= (a.r - b.r).abs() {
                continue;
            }
            let (ux, uy) = ((b.x - a.x) / d, (b.y - a.y) / d);
            if d >= a.r + b.r {
                let gap = d - a.r - b.r;
                if gap < best && !buried(a.x + a.r * ux, a.y + a.r * uy, [i, j, usize::MAX]) {
                    best = gap;
                }
                continue;
            }
            let t = (a.r * a.r - b.r * b.r + d * d) / (2.0 * d);
            let h = (a.r * a.r - t * t).max(0.0).sqrt();
            let (mx, my) = (a.x + t * ux, a.y + t * uy);
            if d >= a.r.max(b.r) && h < best && !buried(mx, my, [i, j, usize::MAX]) {
                best = h;
            }
            for (px, py) in [(mx + h * uy, my - h * ux), (mx - h * uy, my + h * ux)] {
                for (k, c) in disks.iter().enumerate() {
                    if k == i || k == j || !c.overlaps(a) || !c.overlaps(b) {
                        continue;
                    }
                    let gap = ((px - c.x).powi(2) + (py - c.y).powi(2)).sqrt() - c.r;
                    if gap >= 0.0 && gap < best && !buried(px, py, [i, j, k]) {
                        best = gap;
                    }
                }
            }
        }
    }
    best
}

/// Functionals measured on a mask.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PixelFunctionals {
    pub area: f64,
    pub euler: i64,
    pub components: usize,
    pub holes: usize,
    pub perimeter_estimate: f64,
    /// Set when some gap, neck or hole of the union is at most two cells
    /// wide, or a hole has no cell whose 3×3 neighbourhood is empty. Counts
    /// are then untrusted.
    pub degenerate: bool,
    pub boundary_cells: usize,
    pub delta: f64,
}

pub fn pixel_functionals(mask: &PixelMask) -> PixelFunctionals {
    let components = mask.components().len();
    let holes = mask.hole_components();
    let unresolved = holes.iter().any(|(_, thick)| !thick);
    let holes = holes.len();
    PixelFunctionals {
        area: mask.covered_cells() as f64 * mask.delta * mask.delta,
        euler: components as i64 - holes as i64,
        components,
        holes,
        perimeter_estimate: contour_length(mask),
        degenerate: unresolved || mask.thinnest_feature <= THIN_CELLS * mask.delta,
        boundary_cells: mask.boundary_cells(),
        delta: mask.delta,
    }
}

/// Length of the zero contour of the coverage field
/// `max_k (r_k - |c - x_k|)` by marching squares with linear interpolation.
/// Only 2×2 blocks next to run ends can straddle the contour.
fn contour_length(mask: &PixelMask) -> f64 {
    let delta = mask.delta;
    let field = |i: u32, j: usize, near: &[&MarkedPoint]| -> f64 {
        let [x, y] = mask.cell_center(i as usize, j);
        near.iter()
            .map(|d| d.r - ((x - d.x).powi(2) + (y - d.y).powi(2)).sqrt())
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let seg = |p: (f64, f64), q: (f64, f64)| ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt();
    let corners = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
    let mut total = 0.0;
    let mut spans: Vec<Run> = Vec::new();
    for j in 0..mask.ny.saturating_sub(1) {
        // Blocks straddle the contour where a row has a run end or where the
        // two rows differ.
        spans.clear();
        for &(s, e) in mask.rows[j].iter().chain(&mask.rows[j + 1]) {
            spans.push((s.saturating_sub(1), s + 1));
            spans.push((e - 1, e + 1));
        }
        for (s, e) in symmetric_difference(&mask.rows[j], &mask.rows[j + 1]) {
            spans.push((s.saturating_sub(1), e + 1));
        }
        if spans.is_empty() {
            continue;
        }
        spans.sort_unstable();
        let mut cols: Vec<u32> = Vec::new();
        let mut next = 0;
        for &(s, e) in &spans {
            for i in s.max(next)..e {
                cols.push(i);
            }
            next = next.max(e);
        }
        let y0 = mask.origin[1] + (j as f64 + 0.5) * delta;
        let near: Vec<&MarkedPoint> = mask
            .disks
            .iter()
            .filter(|d| (d.y - y0).abs() <= d.r + 2.0 * delta)
            .collect();
        for &i in &cols {
            if i as usize + 1 >= mask.nx {
                continue;
            }
            let v = [
                field(i, j, &near),
                field(i + 1, j, &near),
                field(i + 1, j + 1, &near),
                field(i, j + 1, &near),
            ];
            let inside = v.map(|x| x >= 0.0);
            if inside.iter().all(|&b| b) || inside.iter().all(|&b| !b) {
                continue;
            }
            let mut cross: Vec<(f64, f64)> = Vec::with_capacity(4);
            for e in 0..4 {
                let (a, b) = (e, (e + 1) % 4);
                if inside[a] != inside[b] {
                    let t = v[a] / (v[a] - v[b]);
                    let (pa, pb) = (corners[a], corners[b]);
                    cross.push((pa.0 + t * (pb.0 - pa.0), pa.1 + t * (pb.1 - pa.1)));
                }
            }
            total += match cross.len() {
                2 => seg(cross[0], cross[1]),
                4 => {
                    // Saddle: pair edges according to the center value.
                    let center = 0.25 * (v[0] + v[1] + v[2] + v[3]);
                    if (center >= 0.0) == inside[0] {
                        seg(cross[0], cross[3]) + seg(cross[1], cross[2])
                    } else {
                        seg(cross[0], cross[1]) + seg(cross[2], cross[3])
                    }
                }
                _ => 0.0,
            };
        }
    }
    total * delta
}

fn symmetric_difference(a: &[Run], b: &[Run]) -> Vec<Run> {
    let mut edges: Vec<u32> = a.iter().chain(b).flat_map(|&(s, e)| [s, e]).collect();
    edges.sort_unstable();
    // Each boundary toggles membership; coinciding boundaries cancel.
    let mut out = Vec::new();
    let mut k = 0;
    let mut open: Option<u32> = None;
    while k < edges.len() {
        let x = edges[k];
        let mut m = 0;
        while k < edges.len() && edges[k] == x {
            m += 1;
            k += 1;
        }
        if m % 2 == 1 {
            match open.take() {
                Some(s) => out.push((s, x)),
                None => open = Some(x),
            }
        }
    }
    out
}

/// Pixel functionals at `delta`, refining to `delta / 4` once when the first
/// mask is flagged degenerate.
pub fn pixel_functionals_refined(config: &Configuration, delta: f64) -> Result<PixelFunctionals> {
    let first = pixel_functionals(&rasterize(config, delta)?);
    if !first.degenerate {
        return Ok(first);
    }
    Ok(pixel_functionals(&rasterize(config, delta / 4.0)?))
}

/// Distance from `p` to the nearest cell center of `cells`.
pub fn distance_to_cells(mask: &PixelMask, cells: &[(usize, Run)], p: [f64; 2]) -> f64 {
    let d = mask.delta;
    cells
        .iter()
        .map(|&(j, (s, e))| {
            let y = mask.origin[1] + (j as f64 + 0.5) * d;
            let fi = ((p[0] - mask.origin[0]) / d - 0.5)
                .round()
                .clamp(s as f64, (e - 1) as f64);
            let x = mask.origin[0] + (fi + 0.5) * d;
            ((x - p[0]).powi(2) + (y - p[1]).powi(2)).sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Smallest distance between cell centers of two cell sets, each on its
/// own mask.
pub fn distance_between_cells(
    ma: &PixelMask,
    a: &[(usize, Run)],
    mb: &PixelMask,
    b: &[(usize, Run)],
) -> f64 {
    // Each run is a horizontal segment through its cell centers.
    let seg = |m: &PixelMask, &(j, (s, e)): &(usize, Run)| {
        let [x0, y] = m.cell_center(s as usize, j);
        (y, x0, x0 + (e - s - 1) as f64 * m.delta)
    };
    let sb: Vec<(f64, f64, f64)> = b.iter().map(|r| seg(mb, r)).collect();
    let mut best = f64::INFINITY;
    for r in a {
        let (y1, a1, b1) = seg(ma, r);
        for &(y2, a2, b2) in &sb {
            let dx = (a2 - b1).max(a1 - b2).max(0.0);
            best = best.min((dx * dx + (y1 - y2).powi(2)).sqrt());
        }
    }
    best
}

/// Whether the cell holding `p` belongs to `cells`.
pub fn cells_contain(mask: &PixelMask, cells: &[(usize, Run)], p: [f64; 2]) -> bool {
    let i = ((p[0] - mask.origin[0]) / mask.delta).floor();
    let j = ((p[1] - mask.origin[1]) / mask.delta).floor();
    if i < 0.0 || j < 0.0 {
        return false;
    }
    let (i, j) = (i as u32, j as usize);
    cells.iter().any(|&(row, (s, e))| row == j && s <= i && i < e)
}

/// Cells of `cells` whose 3×3 neighbourhood lies in `cells`.
pub fn shrink_cells(mask: &PixelMask, cells: &[(usize, Run)]) -> Cells {
    let mut rows = vec![Vec::new(); mask.ny];
    for &(j, run) in cells {
        rows[j].push(run);
    }
    for r in &mut rows {
        r.sort_unstable();
    }
    erode(&rows)
        .into_iter()
        .enumerate()
        .flat_map(|(j, r)| r.into_iter().map(move |run| (j, run)))
        .collect()
}
