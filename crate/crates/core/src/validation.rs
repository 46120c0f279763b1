//! Seeded property corpus: the exact kernel against the pixel oracle, the
//! incremental identity, the geometric lemmas bounding local changes and
//! hole distances, and Monte Carlo checks of the sampler.
//!
//! Every property returns a [`PropertyResult`]; `validate` bundles them
//! into a report.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{
    component_labels, delta_functionals, functionals, Configuration, FunctionalDelta, MarkedPoint,
    RadiusBounds, Rect, Theta,
};
use crate::oracle::{
    cells_contain, distance_between_cells, distance_to_cells, pixel_functionals, rasterize,
    rasterize_disks, shrink_cells, Cells, PixelMask, DEFAULT_CELLS_PER_R0,
};
use crate::sampler::{poisson_sandwich_bounds, run_chain, Boundary, QuermassParams, RadiusLaw, RunOptions};
use crate::stats::{chi_square_poisson, ks_test, mean_se};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyResult {
    pub name: String,
    pub status: Status,
    pub checked: usize,
    pub skipped: usize,
    pub violations: usize,
    pub detail: String,
}

impl PropertyResult {
    fn new(name: &str, checked: usize, skipped: usize, violations: usize, detail: String) -> Self {
        Self {
            name: name.into(),
            status: if violations == 0 { Status::Pass } else { Status::Fail },
            checked,
            skipped,
            violations,
            detail,
        }
    }

    fn skip(name: &str, detail: String) -> Self {
        Self {
            name: name.into(),
            status: Status::Skip,
            checked: 0,
            skipped: 0,
            violations: 0,
            detail,
        }
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

/// A random configuration of the kernel–oracle corpus: 1 to 30 disks with
/// radii in `[1, 2]` in a square of side `3·√n`.
pub fn oracle_corpus_config(rng: &mut impl Rng) -> Configuration {
    let n = rng.random_range(1..=30usize);
    let side = 3.0 * (n as f64).sqrt();
    let bounds = RadiusBounds::new(1.0, 2.0).expect("valid bounds");
    let pts: Vec<MarkedPoint> = (0..n)
        .map(|_| {
            MarkedPoint::new(
                rng.random_range(0.0..side),
                rng.random_range(0.0..side),
                rng.random_range(1.0..2.0),
            )
        })
        .collect();
    Configuration::with_points(Rect::square(side), bounds, pts).expect("points inside window")
}

/// Options of [`kernel_vs_oracle`].
#[derive(Clone, Copy, Debug)]
pub struct OracleCheck {
    pub configs: usize,
    pub seed: u64,
    /// Oracle resolution in cells per `r0`.
    pub cells_per_r0: f64,
}

impl Default for OracleCheck {
    fn default() -> Self {
        Self {
            configs: 500,
            seed: 1,
            cells_per_r0: DEFAULT_CELLS_PER_R0,
        }
    }
}

/// Exact components/holes/euler against the oracle, area within
/// `2·δ·perimeter`, perimeter within 5%. Masks flagged degenerate are
/// refined once by 4; masks still degenerate are skipped.
pub fn kernel_vs_oracle(opts: OracleCheck) -> PropertyResult {
    let name = "kernel_vs_oracle";
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let (mut checked, mut skipped, mut bad) = (0, 0, 0);
    let mut worst_perimeter: f64 = 0.0;
    let mut first = String::new();
    for case in 0..opts.configs {
        let cfg = oracle_corpus_config(&mut rng);
        let r0 = cfg.bounds().r0;
        let kernel = match functionals(&cfg) {
            Ok(f) => f,
            Err(Error::DegenerateGeometry(_)) => {
                skipped += 1;
                continue;
            }
            Err(e) => return PropertyResult::skip(name, e.to_string()),
        };
        let mut delta = r0 / opts.cells_per_r0;
        let mut pixel = match rasterize(&cfg, delta) {
            Ok(m) => pixel_functionals(&m),
            Err(e @ Error::ResolutionTooCoarse { .. }) => {
                return PropertyResult::skip(name, e.to_string())
            }
            Err(e) => return PropertyResult::skip(name, e.to_string()),
        };
        if pixel.degenerate {
            delta /= 4.0;
            pixel = pixel_functionals(&rasterize(&cfg, delta).expect("finer than before"));
        }
        if pixel.degenerate {
            skipped += 1;
            continue;
        }
        checked += 1;
        let rel = if kernel.perimeter > 0.0 {
            (pixel.perimeter_estimate - kernel.perimeter).abs() / kernel.perimeter
        } else {
            pixel.perimeter_estimate
        };
        worst_perimeter = worst_perimeter.max(rel);
        let ok = kernel.components == pixel.components
            && kernel.holes == pixel.holes
            && kernel.euler == pixel.euler
            && (kernel.area - pixel.area).abs() <= 2.0 * delta * kernel.perimeter
            && rel <= 0.05;
        if !ok {
            bad += 1;
            if first.is_empty() {
                first = format!("; first failure case {case}: kernel {kernel:?} vs pixel {pixel:?}");
            }
        }
    }
    PropertyResult::new(
        name,
        checked,
        skipped,
        bad,
        format!("worst perimeter relative error {worst_perimeter:.4}{first}"),
    )
}

/// A random `(p, ω)` pair: up to 40 disks with radii in `[0.5, 1]` in a
/// 10×10 window, `p` drawn the same way.
pub fn delta_corpus_pair(rng: &mut impl Rng) -> (MarkedPoint, Configuration) {
    let bounds = RadiusBounds::new(0.5, 1.0).expect("valid bounds");
    let draw = |rng: &mut dyn rand::RngCore| {
        MarkedPoint::new(
            rng.random_range(0.0..10.0),
            rng.random_range(0.0..10.0),
            rng.random_range(0.5..=1.0),
        )
    };
    let n = rng.random_range(0..=40usize);
    let pts: Vec<MarkedPoint> = (0..n).map(|_| draw(rng)).collect();
    let p = draw(rng);
    (p, Configuration::with_points(Rect::square(10.0), bounds, pts).expect("inside window"))
}

/// `delta_functionals(p, ω)` against `functionals(ω ∪ p) − functionals(ω)`.
/// With `mutate`, the Euler delta's sign is flipped first (a self-test of
/// the check).
pub fn delta_identity(pairs: usize, seed: u64, mutate: bool) -> PropertyResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut checked, mut skipped, mut bad) = (0, 0, 0);
    let mut first = String::new();
    for case in 0..pairs {
        let (p, cfg) = delta_corpus_pair(&mut rng);
        let outcome = (|| -> Result<(FunctionalDelta, FunctionalDelta)> {
            let mut d = delta_functionals(&p, &cfg)?;
            if mutate {
                d.d_euler = -d.d_euler;
                d.d_holes = d.d_components - d.d_euler;
            }
            let before = functionals(&cfg)?;
            let mut with = cfg.clone();
            with.insert(p)?;
            Ok((d, functionals(&with)? - before))
        })();
        let (d, full) = match outcome {
            Ok(v) => v,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        checked += 1;
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0);
        let ok = close(d.d_area, full.d_area)
            && close(d.d_perimeter, full.d_perimeter)
            && d.d_euler == full.d_euler
            && d.d_components == full.d_components
            && d.d_holes == full.d_holes;
        if !ok {
            bad += 1;
            if first.is_empty() {
                first = format!("first failure case {case}: incremental {d:?} vs recomputed {full:?}");
            }
        }
    }
    PropertyResult::new("delta_identity", checked, skipped, bad, first)
}

/// Upper bound `K` of `θ1·dA + θ2·dL + θ3·dC` assembled from the bounds
/// on each change.
pub fn combination_bound(theta: &Theta, r0: f64, r1: f64) -> f64 {
    let da = [0.0, PI * r1 * r1];
    let dl = [-2.0 * PI * (r1 + r0).powi(2) / r0, 2.0 * PI * r1];
    let dc = [-PI * (1.0 + r1 / r0), 1.0];
    let mut k = f64::NEG_INFINITY;
    for a in da {
        for l in dl {
            for c in dc {
                k = k.max(theta.theta1 * a + theta.theta2 * l + theta.theta3 * c);
            }
        }
    }
    k
}

/// Bounds on the area, perimeter and component changes of one added disk,
/// and their weighted combination for a random θ.
pub fn local_change_bounds(samples: usize, seed: u64) -> PropertyResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (r0, r1) = (0.5, 1.0);
    let (mut checked, mut skipped, mut bad) = (0, 0, 0);
    let mut first = String::new();
    let tol = 1e-9;
    for case in 0..samples {
        let (p, cfg) = delta_corpus_pair(&mut rng);
        let theta = Theta::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let d = match delta_functionals(&p, &cfg) {
            Ok(d) => d,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        checked += 1;
        let dc = d.d_components as f64;
        let combo = theta.theta1 * d.d_area + theta.theta2 * d.d_perimeter + theta.theta3 * dc;
        let ok = d.d_area >= -tol
            && d.d_area <= PI * r1 * r1 + tol
            && d.d_perimeter >= -2.0 * PI * (r1 + r0).powi(2) / r0 - tol
            && d.d_perimeter <= 2.0 * PI * r1 + tol
            && dc >= -PI * (1.0 + r1 / r0)
            && dc <= 1.0
            && combo <= combination_bound(&theta, r0, r1) + tol;
        if !ok {
            bad += 1;
            if first.is_empty() {
                first = format!("first failure case {case}: {d:?} with {theta:?}");
            }
        }
    }
    PropertyResult::new("local_change_bounds", checked, skipped, bad, first)
}

/// A Boolean sample with unit radii in a 12×12 window at a random reduced
/// density in `[0.8, 1.6]`.
pub fn hole_corpus_config(rng: &mut impl Rng) -> Configuration {
    let side = 12.0;
    let eta = rng.random_range(0.8..1.6);
    let n = (eta / PI * side * side).round() as usize;
    let bounds = RadiusBounds::new(1.0, 1.0).expect("valid bounds");
    let pts: Vec<MarkedPoint> = (0..n)
        .map(|_| MarkedPoint::new(rng.random_range(0.0..side), rng.random_range(0.0..side), 1.0))
        .collect();
    Configuration::with_points(Rect::square(side), bounds, pts).expect("inside window")
}

struct ComponentHoles {
    disks: Vec<MarkedPoint>,
    mask: PixelMask,
    /// Full and one-cell-shrunk cell sets of each hole.
    holes: Vec<(Cells, Cells)>,
    /// The mask stayed degenerate after refinement; `holes` is empty.
    degenerate: bool,
}

/// Per-property violation counts of the hole-distance lemmas.
#[derive(Clone, Debug, Default)]
struct HoleTally {
    checked: [usize; 4],
    bad: [usize; 4],
    first: [String; 4],
}

impl HoleTally {
    fn record(&mut self, k: usize, ok: bool, what: impl FnOnce() -> String) {
        self.checked[k] += 1;
        if !ok {
            self.bad[k] += 1;
            if self.first[k].is_empty() {
                self.first[k] = what();
            }
        }
    }
}

/// Perimeter bound by the area of the dilated bounding box, and the three
/// hole-distance lemmas, on equal-radius configurations with holes. Hole
/// distances use the oracle's hole cells shrunk by one cell.
pub fn hole_lemmas(configs: usize, seed: u64, cells_per_r0: f64) -> Vec<PropertyResult> {
    let names = [
        "perimeter_bound",
        "point_to_hole_distance",
        "germ_to_foreign_hole_distance",
        "hole_to_hole_distance",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r0 = 1.0;
    let delta = r0 / cells_per_r0;
    if cells_per_r0 < 8.0 {
        return names
            .iter()
            .map(|n| PropertyResult::skip(n, format!("oracle resolution r0/{cells_per_r0} is coarser than r0/8")))
            .collect();
    }
    let mut tally = HoleTally::default();
    let mut skipped = 0;
    let mut used = 0;
    let mut attempts = 0;
    while used < configs && attempts < 50 * configs.max(1) {
        attempts += 1;
        let cfg = hole_corpus_config(&mut rng);
        let f = match functionals(&cfg) {
            Ok(f) if f.holes > 0 => f,
            Ok(_) => continue,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        used += 1;

        // Perimeter bound over the bounding box of all grains.
        let pts = cfg.points();
        let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for p in pts {
            x0 = x0.min(p.x - p.r);
            y0 = y0.min(p.y - p.r);
            x1 = x1.max(p.x + p.r);
            y1 = y1.max(p.y + p.r);
        }
        let (w, h) = (x1 - x0, y1 - y0);
        let bound = 2.0 * (w * h + 2.0 * (w + h) * r0 + PI * r0 * r0) / r0;
        tally.record(0, f.perimeter <= bound, || format!("perimeter {} > {bound}", f.perimeter));

        let comps = component_holes(&cfg, delta);
        skipped += comps.iter().filter(|c| c.degenerate).count();

        // Random points outside a component and its hole.
        for c in comps.iter().filter(|c| !c.holes.is_empty()) {
            for _ in 0..20 {
                let p = [
                    rng.random_range(c.mask.origin[0]..c.mask.origin[0] + c.mask.nx as f64 * delta),
                    rng.random_range(c.mask.origin[1]..c.mask.origin[1] + c.mask.ny as f64 * delta),
                ];
                let dc = c
                    .disks
                    .iter()
                    .map(|d| ((p[0] - d.x).powi(2) + (p[1] - d.y).powi(2)).sqrt() - d.r)
                    .fold(f64::INFINITY, f64::min);
                if dc <= 0.0 {
                    continue;
                }
                for (full, shrunk) in &c.holes {
                    if shrunk.is_empty() || distance_to_cells(&c.mask, full, p) <= delta {
                        continue;
                    }
                    let dt = distance_to_cells(&c.mask, shrunk, p);
                    tally.record(1, dt * dt >= dc * dc + 2.0 * dc * r0, || {
                        format!("point {p:?}: d(x,T) = {dt}, d(x,C) = {dc}")
                    });
                }
            }
        }

        for (a, ca) in comps.iter().enumerate() {
            for (b, cb) in comps.iter().enumerate() {
                if a == b || cb.holes.is_empty() {
                    continue;
                }
                for (full, shrunk) in &cb.holes {
                    if shrunk.is_empty() {
                        continue;
                    }
                    // A component inside the hole is exempt.
                    if cells_contain(&cb.mask, full, [ca.disks[0].x, ca.disks[0].y]) {
                        continue;
                    }
                    for d in &ca.disks {
                        let dist = distance_to_cells(&cb.mask, shrunk, [d.x, d.y]);
                        tally.record(2, dist >= 3f64.sqrt() * r0, || {
                            format!("germ ({}, {}) at {dist} from a foreign hole", d.x, d.y)
                        });
                    }
                    if a < b {
                        continue;
                    }
                    for (full_a, shrunk_a) in &ca.holes {
                        if shrunk_a.is_empty()
                            || cells_contain(&ca.mask, full_a, [cb.disks[0].x, cb.disks[0].y])
                        {
                            continue;
                        }
                        let dist = distance_between_cells(&ca.mask, shrunk_a, &cb.mask, shrunk);
                        tally.record(3, dist >= 2.0 * r0, || format!("holes {dist} apart"));
                    }
                }
            }
        }
    }
    (0..4)
        .map(|k| {
            let mut notes = vec!["skipped counts degenerate configurations and component masks".to_string()];
            if used < configs {
                notes.push(format!("only {used} of {configs} configurations had holes"));
            }
            if !tally.first[k].is_empty() {
                notes.push(tally.first[k].clone());
            }
            PropertyResult::new(names[k], tally.checked[k], skipped, tally.bad[k], notes.join("; "))
        })
        .collect()
}

/// Every component rasterized alone, with the holes of those having at
/// least three disks. Masks still degenerate after refinement get no holes.
fn component_holes(cfg: &Configuration, delta: f64) -> Vec<ComponentHoles> {
    let (labels, n) = component_labels(cfg);
    let mut groups: Vec<Vec<MarkedPoint>> = vec![Vec::new(); n];
    for (p, &l) in cfg.points().iter().zip(&labels) {
        groups[l].push(*p);
    }
    let r0 = cfg.bounds().r0;
    let mut out = Vec::new();
    for disks in groups {
        let mut mask = rasterize_disks(&disks, r0, delta).expect("resolution checked by caller");
        let mut degenerate = false;
        if disks.len() >= 3 && pixel_functionals(&mask).degenerate {
            mask = rasterize_disks(&disks, r0, delta / 4.0).expect("finer than before");
            degenerate = pixel_functionals(&mask).degenerate;
        }
        let holes = if disks.len() >= 3 && !degenerate {
            mask.holes()
                .into_iter()
                .map(|h| {
                    let s = shrink_cells(&mask, &h);
                    (h, s)
                })
                .collect()
        } else {
            Vec::new()
        };
        out.push(ComponentHoles {
            disks,
            mask,
            holes,
            degenerate,
        });
    }
    out
}

/// Options of the Poisson-reduction check.
#[derive(Clone, Copy, Debug)]
pub struct PoissonCheck {
    pub n_steps: u64,
    pub seed: u64,
    /// Steps between point-count samples.
    pub count_spacing: u64,
    /// Steps between radius snapshots.
    pub radius_spacing: u64,
}

impl Default for PoissonCheck {
    fn default() -> Self {
        Self {
            n_steps: 1_000_000,
            seed: 5,
            count_spacing: 1_000,
            radius_spacing: 5_000,
        }
    }
}

/// With θ = 0, z = 1 on `[0,10]²` and radii uniform on `[0.5, 1]`, the
/// point count is Poisson(100) and the radii follow the radius law.
pub fn poisson_reduction(opts: PoissonCheck) -> Vec<PropertyResult> {
    let law = RadiusLaw::Uniform { lo: 0.5, hi: 1.0 };
    let params = QuermassParams::new(Theta::ZERO, 1.0, 0.5, 1.0, law.clone()).expect("valid params");
    let mut run = RunOptions::new(opts.n_steps, opts.seed);
    run.thinning = Some(opts.count_spacing.min(opts.radius_spacing));
    let mut counts = Vec::new();
    let mut radii = Vec::new();
    let result = run_chain(&params, Rect::square(10.0), Boundary::Free, 1, &run, |state, rec| {
        let since = rec.step - run.burn_in_for();
        if since % opts.count_spacing == 0 {
            counts.push(rec.n);
        }
        if since % opts.radius_spacing == 0 {
            radii.extend(state.config().points().iter().map(|p| p.r));
        }
    });
    if let Err(e) = result {
        return vec![PropertyResult::new("poisson_count", 0, 0, 1, e.to_string())];
    }
    let chi = chi_square_poisson(&counts, 100.0);
    let ks = ks_test(&radii, |r| law.cdf(r));
    let (mean, se) = mean_se(&counts.iter().map(|&c| c as f64).collect::<Vec<_>>());
    vec![
        PropertyResult::new(
            "poisson_count",
            counts.len(),
            0,
            usize::from(chi.p_value <= 0.01),
            format!(
                "chi-square {:.2} on {} dof, p = {:.4}; mean count {mean:.2} ± {se:.2}",
                chi.statistic, chi.dof, chi.p_value
            ),
        ),
        PropertyResult::new(
            "poisson_radii",
            radii.len(),
            0,
            usize::from(ks.p_value <= 0.01),
            format!("KS D = {:.4}, p = {:.4}", ks.statistic, ks.p_value),
        ),
    ]
}

/// Options of the sandwich check.
#[derive(Clone, Copy, Debug)]
pub struct SandwichCheck {
    pub replicas: usize,
    pub n_steps: u64,
    pub seed: u64,
}

impl Default for SandwichCheck {
    fn default() -> Self {
        Self {
            replicas: 50,
            n_steps: 40_000,
            seed: 6,
        }
    }
}

/// For θ = (0.5, 0.2, 0), z = 1, fixed radius 0.5 on `[0,10]²`, the mean
/// intensity lies between the dominating Poisson intensities.
pub fn sandwich(opts: SandwichCheck) -> PropertyResult {
    let params = QuermassParams::new(Theta::new(0.5, 0.2, 0.0), 1.0, 0.5, 0.5, RadiusLaw::Fixed { r: 0.5 })
        .expect("valid params");
    let window = Rect::square(10.0);
    let (c0, c1) = poisson_sandwich_bounds(&params).expect("theta3 = 0");
    let (lo, hi) = (params.z * (-c1).exp(), params.z * (-c0).exp());
    let mut means = Vec::with_capacity(opts.replicas);
    for r in 0..opts.replicas {
        let mut run = RunOptions::new(opts.n_steps, opts.seed);
        run.stream = r as u64;
        run.poisson_init = true;
        match run_chain(&params, window, Boundary::Free, 1, &run, |_, _| {}) {
            Ok((recs, _)) => {
                let n: f64 = recs.iter().map(|r| r.n as f64).sum::<f64>() / recs.len().max(1) as f64;
                means.push(n / window.area());
            }
            Err(e) => return PropertyResult::new("intensity_sandwich", r, 0, 1, e.to_string()),
        }
    }
    let (mean, se) = mean_se(&means);
    let ok = mean >= lo - 3.0 * se && mean <= hi + 3.0 * se;
    PropertyResult::new(
        "intensity_sandwich",
        means.len(),
        0,
        usize::from(!ok),
        format!("mean intensity {mean:.4} ± {se:.4} vs [{lo:.4}, {hi:.4}]"),
    )
}

/// Sizes and switches of a full validation run.
#[derive(Clone, Copy, Debug)]
pub struct ValidateOptions {
    pub oracle: OracleCheck,
    pub delta_pairs: usize,
    pub bound_samples: usize,
    pub hole_configs: usize,
    pub poisson: PoissonCheck,
    pub sandwich: SandwichCheck,
    /// Flip the sign of the incremental Euler change.
    pub mutate_d_euler: bool,
    pub seed: u64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            oracle: OracleCheck::default(),
            delta_pairs: 1000,
            bound_samples: 10_000,
            hole_configs: 200,
            poisson: PoissonCheck::default(),
            sandwich: SandwichCheck::default(),
            mutate_d_euler: false,
            seed: 1,
        }
    }
}

impl ValidateOptions {
    /// Derives every corpus seed from `seed`; the defaults correspond to 1.
    pub fn reseeded(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.oracle.seed = seed;
        self.poisson.seed = seed.wrapping_add(4);
        self.sandwich.seed = seed.wrapping_add(5);
        self
    }

    /// Scales every sample size by `f` (minimum 1 each).
    pub fn scaled(mut self, f: f64) -> Self {
        let s = |v: usize| ((v as f64 * f).round() as usize).max(1);
        self.oracle.configs = s(self.oracle.configs);
        self.delta_pairs = s(self.delta_pairs);
        self.bound_samples = s(self.bound_samples);
        self.hole_configs = s(self.hole_configs);
        self.poisson.n_steps = (self.poisson.n_steps as f64 * f).round().max(20_000.0) as u64;
        self.sandwich.replicas = s(self.sandwich.replicas).max(2);
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub properties: Vec<PropertyResult>,
}

pub fn validate(opts: &ValidateOptions) -> ValidationReport {
    let mut properties = vec![
        kernel_vs_oracle(opts.oracle),
        delta_identity(opts.delta_pairs, opts.seed.wrapping_add(1), opts.mutate_d_euler),
        local_change_bounds(opts.bound_samples, opts.seed.wrapping_add(2)),
    ];
    properties.extend(hole_lemmas(
        opts.hole_configs,
        opts.seed.wrapping_add(3),
        opts.oracle.cells_per_r0,
    ));
    properties.extend(poisson_reduction(opts.poisson));
    properties.push(sandwich(opts.sandwich));
    ValidationReport {
        passed: properties.iter().all(PropertyResult::passed),
        properties,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_identity_and_bounds_pass() {
        assert_eq!(delta_identity(50, 3, false).status, Status::Pass);
        assert_eq!(local_change_bounds(200, 4).status, Status::Pass);
    }

    #[test]
    fn mutation_is_caught() {
        assert_eq!(delta_identity(50, 3, true).status, Status::Fail);
    }

    #[test]
    fn coarse_oracle_is_a_skip() {
        let r = kernel_vs_oracle(OracleCheck {
            configs: 3,
            seed: 1,
            cells_per_r0: 4.0,
        });
        assert_eq!(r.status, Status::Skip);
        assert!(r.detail.contains("coarser"));
    }

    #[test]
    fn combination_bound_zero_theta() {
        assert_eq!(combination_bound(&Theta::ZERO, 1.0, 1.0), 0.0);
    }
}
