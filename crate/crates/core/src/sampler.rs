//! Birth–death–move Metropolis–Hastings sampler for the Quermass model and
//! its K-type hardcore extension.
//!
//! The target on a window Λ has density proportional to
//! `z^n · exp(-H(ω ∪ boundary))` with respect to the unit-rate Poisson
//! process, where `H = θ1·area + θ2·perimeter + θ3·euler` of the union. The
//! partition function is never needed: every move only looks at the local
//! energy of one disk against its neighbours.

use std::fmt;
use std::io::Write;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    component_labels, functionals, local_delta, local_radius, Configuration, LocalDelta,
    MarkedPoint, RadiusBounds, Rect, Theta,
};

/// Distribution `Q` of the radii.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RadiusLaw {
    Fixed { r: f64 },
    Uniform { lo: f64, hi: f64 },
    Discrete { values: Vec<f64>, weights: Vec<f64> },
}

impl RadiusLaw {
    /// Smallest and largest radius in the support.
    pub fn support(&self) -> (f64, f64) {
        match self {
            RadiusLaw::Fixed { r } => (*r, *r),
            RadiusLaw::Uniform { lo, hi } => (*lo, *hi),
            RadiusLaw::Discrete { values, weights } => values
                .iter()
                .zip(weights)
                .filter(|(_, &w)| w > 0.0)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (&v, _)| {
                    (a.min(v), b.max(v))
                }),
        }
    }

    pub fn cdf(&self, r: f64) -> f64 {
        match self {
            RadiusLaw::Fixed { r: v } => f64::from(u8::from(r >= *v)),
            RadiusLaw::Uniform { lo, hi } => {
                if hi == lo {
                    f64::from(u8::from(r >= *lo))
                } else {
                    ((r - lo) / (hi - lo)).clamp(0.0, 1.0)
                }
            }
            RadiusLaw::Discrete { values, weights } => {
                let total: f64 = weights.iter().sum();
                values
                    .iter()
                    .zip(weights)
                    .filter(|(&v, _)| v <= r)
                    .map(|(_, w)| w)
                    .sum::<f64>()
                    / total
            }
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        match self {
            RadiusLaw::Fixed { r } => *r,
            RadiusLaw::Uniform { lo, hi } => {
                if hi > lo {
                    rng.random_range(*lo..*hi)
                } else {
                    *lo
                }
            }
            RadiusLaw::Discrete { values, weights } => {
                let idx = WeightedIndex::new(weights).expect("weights validated");
                values[idx.sample(rng)]
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        match self {
            RadiusLaw::Fixed { r } if !(*r > 0.0 && r.is_finite()) => bad(format!("fixed radius {r}")),
            RadiusLaw::Uniform { lo, hi } if !(*lo > 0.0 && lo <= hi && hi.is_finite()) => {
                bad(format!("uniform radius law needs 0 < lo <= hi, got [{lo}, {hi}]"))
            }
            RadiusLaw::Discrete { values, weights } => {
                if values.is_empty() || values.len() != weights.len() {
                    return bad("discrete radius law needs matching, nonempty values and weights".into());
                }
                if values.iter().any(|v| !(*v > 0.0 && v.is_finite()))
                    || weights.iter().any(|w| !(*w >= 0.0 && w.is_finite()))
                    || weights.iter().sum::<f64>() <= 0.0
                {
                    return bad("discrete radius law has a bad value or weight".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Parameters of the Quermass model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuermassParams {
    pub theta: Theta,
    /// Activity: points per unit area of the reference Poisson process.
    pub z: f64,
    pub r0: f64,
    pub r1: f64,
    pub radius_law: RadiusLaw,
}

impl QuermassParams {
    pub fn new(theta: Theta, z: f64, r0: f64, r1: f64, radius_law: RadiusLaw) -> Result<Self> {
        let p = Self {
            theta,
            z,
            r0,
            r1,
            radius_law,
        };
        p.validate()?;
        Ok(p)
    }

    /// Boolean model (θ = 0) with a fixed radius.
    pub fn boolean(z: f64, r: f64) -> Result<Self> {
        Self::new(Theta::ZERO, z, r, r, RadiusLaw::Fixed { r })
    }

    pub fn bounds(&self) -> RadiusBounds {
        RadiusBounds {
            r0: self.r0,
            r1: self.r1,
        }
    }

    /// Checks the invariants. A radius law that keeps away from `r0` only
    /// triggers a warning.
    pub fn validate(&self) -> Result<()> {
        if !(self.z > 0.0 && self.z.is_finite()) {
            return Err(Error::InvalidParams(format!("activity z must be > 0, got {}", self.z)));
        }
        RadiusBounds::new(self.r0, self.r1)?;
        let t = self.theta;
        if ![t.theta1, t.theta2, t.theta3].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParams("theta must be finite".into()));
        }
        self.radius_law.validate()?;
        let (lo, hi) = self.radius_law.support();
        let tol = 1e-12 * self.r1;
        if lo < self.r0 - tol || hi > self.r1 + tol {
            return Err(Error::InvalidParams(format!(
                "radius law support [{lo}, {hi}] leaves [r0, r1] = [{}, {}]",
                self.r0, self.r1
            )));
        }
        if !self.radius_law_reaches_r0() {
            log::warn!(
                "radius law puts no mass near r0 = {} (smallest radius {lo}); \
                 the existence condition Q([r0 + e, r1]) < 1 fails",
                self.r0
            );
        }
        Ok(())
    }

    /// Whether `Q([r0 + e, r1]) < 1` for every `e > 0`.
    pub fn radius_law_reaches_r0(&self) -> bool {
        self.radius_law.support().0 <= self.r0 * (1.0 + 1e-12)
    }
}

/// Uniform bounds `C0 <= h <= C1` on the local energy when θ3 = 0.
pub fn poisson_sandwich_bounds(params: &QuermassParams) -> Result<(f64, f64)> {
    let t = params.theta;
    if t.theta3 != 0.0 {
        return Err(Error::Unsupported(
            "Poisson sandwich bounds do not hold when theta3 != 0".into(),
        ));
    }
    let (r0, r1) = (params.r0, params.r1);
    let areas = [0.0, std::f64::consts::PI * r1 * r1];
    let lengths = [
        -2.0 * std::f64::consts::PI * (r1 + r0).powi(2) / r0,
        2.0 * std::f64::consts::PI * r1,
    ];
    let mut c0 = f64::INFINITY;
    let mut c1 = f64::NEG_INFINITY;
    for a in areas {
        for l in lengths {
            let v = Theta::new(t.theta1, t.theta2, 0.0).energy(a, l, 0);
            c0 = c0.min(v);
            c1 = c1.max(v);
        }
    }
    Ok((c0, c1))
}

/// Proposal probabilities and translate step size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoveMix {
    pub birth: f64,
    pub death: f64,
    pub translate: f64,
    /// Standard deviation of a translate step, in units of `r0`.
    pub translate_scale: f64,
}

impl Default for MoveMix {
    fn default() -> Self {
        Self {
            birth: 0.4,
            death: 0.4,
            translate: 0.2,
            translate_scale: 0.5,
        }
    }
}

impl MoveMix {
    pub fn validate(&self) -> Result<()> {
        let p = [self.birth, self.death, self.translate];
        if p.iter().any(|v| !(*v >= 0.0)) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParams("move probabilities must be >= 0 and sum to 1".into()));
        }
        if self.birth != self.death {
            return Err(Error::InvalidParams("birth and death probabilities must match".into()));
        }
        if !(self.translate_scale > 0.0) {
            return Err(Error::InvalidParams("translate scale must be > 0".into()));
        }
        Ok(())
    }
}

/// What lies outside the window.
#[derive(Clone, Debug)]
pub enum Boundary {
    /// Nothing: the window is the whole world.
    Free,
    /// Frozen disks with germs outside the window; they contribute to every
    /// local energy and never move.
    FixedOutside(Configuration),
    /// The window is a torus: disks near an edge interact with translated
    /// copies of the disks near the opposite edge.
    Periodic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MoveKind {
    Birth,
    Death,
    Translate,
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MoveKind::Birth => "birth",
            MoveKind::Death => "death",
            MoveKind::Translate => "translate",
        })
    }
}

/// State of the chain after one step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRecord {
    pub step: u64,
    pub n: usize,
    pub area: f64,
    pub perimeter: f64,
    pub euler: i64,
    pub components: usize,
    pub holes: usize,
    pub accepted: bool,
    pub move_kind: MoveKind,
    pub type_counts: Vec<usize>,
}

pub const TRACE_HEADER: &str = "step,n,area,perimeter,euler,components,holes,accepted,move,type_counts";

impl TraceRecord {
    /// One CSV line without the newline; per-type counts are `;`-separated.
    pub fn csv_line(&self) -> String {
        let counts: Vec<String> = self.type_counts.iter().map(|c| c.to_string()).collect();
        format!(
            "{},{},{:.16e},{:.16e},{},{},{},{},{},{}",
            self.step,
            self.n,
            self.area,
            self.perimeter,
            self.euler,
            self.components,
            self.holes,
            self.accepted,
            self.move_kind,
            counts.join(";")
        )
    }
}

pub fn write_trace(mut out: impl Write, records: &[TraceRecord]) -> std::io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.csv_line())?;
    }
    Ok(())
}

/// Proposal and acceptance counts per move kind.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ChainStats {
    pub proposed: [u64; 3],
    pub accepted: [u64; 3],
    /// Proposals rejected because the kernel hit a degenerate arrangement.
    pub degenerate: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct Cached {
    area: f64,
    perimeter: f64,
    euler: i64,
}

impl Cached {
    fn apply(&mut self, d: &LocalDelta, sign: f64) {
        self.area += sign * d.d_area;
        self.perimeter += sign * d.d_perimeter;
        self.euler += sign as i64 * d.d_euler;
    }
}

/// A running chain: the window configuration, the model and the RNG.
///
/// Point labels are the types `0..K`.
#[derive(Clone, Debug)]
pub struct ChainState {
    config: Configuration,
    params: QuermassParams,
    k: u16,
    boundary: Boundary,
    mix: MoveMix,
    rng: ChaCha8Rng,
    step: u64,
    cache: Cached,
    stats: ChainStats,
    last: (MoveKind, bool),
}

/// The RNG for chain `stream` of a run seeded with `seed`.
pub fn chain_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

impl ChainState {
    /// An empty chain on `window`.
    pub fn new(
        params: QuermassParams,
        window: Rect,
        boundary: Boundary,
        k: u16,
        rng: ChaCha8Rng,
    ) -> Result<Self> {
        let config = Configuration::new(window, params.bounds())?;
        Self::with_config(params, config, boundary, k, rng)
    }

    /// A chain started from `config` (labels are taken as types).
    pub fn with_config(
        params: QuermassParams,
        config: Configuration,
        boundary: Boundary,
        k: u16,
        rng: ChaCha8Rng,
    ) -> Result<Self> {
        params.validate()?;
        if k == 0 {
            return Err(Error::InvalidParams("K must be >= 1".into()));
        }
        if config.labels().iter().any(|&l| l >= k) {
            return Err(Error::InvalidParams("point type out of range".into()));
        }
        if let Boundary::FixedOutside(out) = &boundary {
            let w = config.window();
            if out.points().iter().any(|p| w.contains(p.x, p.y) && !on_edge(&w, p)) {
                return Err(Error::InvalidParams("fixed boundary point inside the window".into()));
            }
        }
        let f = functionals(&config)?;
        let state = Self {
            config,
            params,
            k,
            boundary,
            mix: MoveMix::default(),
            rng,
            step: 0,
            cache: Cached {
                area: f.area,
                perimeter: f.perimeter,
                euler: f.euler,
            },
            stats: ChainStats::default(),
            last: (MoveKind::Birth, false),
        };
        if state.k > 1 && state.hardcore_violation().is_some() {
            return Err(Error::InvalidParams("initial configuration violates the hardcore rule".into()));
        }
        state.cache_check()?;
        Ok(state)
    }

    pub fn set_move_mix(&mut self, mix: MoveMix) -> Result<()> {
        mix.validate()?;
        self.mix = mix;
        Ok(())
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn params(&self) -> &QuermassParams {
        &self.params
    }

    pub fn k(&self) -> u16 {
        self.k
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn stats(&self) -> ChainStats {
        self.stats
    }

    /// `z·λ(Λ)`, the expected point count without interaction.
    pub fn mean_poisson_count(&self) -> f64 {
        self.params.z * self.config.window().area()
    }

    /// Fills the window with a Poisson(zλ) sample, dropping draws that would
    /// break the hardcore rule.
    pub fn poisson_init(&mut self) -> Result<()> {
        let mean = self.mean_poisson_count();
        let n = Poisson::new(mean)
            .map_err(|e| Error::InvalidParams(e.to_string()))?
            .sample(&mut self.rng) as usize;
        for _ in 0..n {
            let (p, label) = self.draw_point();
            if self.k > 1 && self.conflicts(&p, label) {
                continue;
            }
            if let Ok(d) = local_delta(&p, &self.window_near(&p), self.config.eps()) {
                self.config.insert_labeled(p, label)?;
                self.cache.apply(&d, 1.0);
            }
        }
        Ok(())
    }

    fn draw_point(&mut self) -> (MarkedPoint, u16) {
        let w = self.config.window();
        let x = self.rng.random_range(w.x0..=w.x1);
        let y = self.rng.random_range(w.y0..=w.y1);
        let r = self.params.radius_law.sample(&mut self.rng);
        let label = if self.k > 1 {
            self.rng.random_range(0..self.k)
        } else {
            0
        };
        (MarkedPoint::new(x, y, r), label)
    }

    /// Window points near `p`, for the window-only functionals.
    fn window_near(&self, p: &MarkedPoint) -> Vec<MarkedPoint> {
        let rad = local_radius(p.r, self.params.r1);
        let mut out = Vec::new();
        self.config.for_each_near(p.x, p.y, rad, |i| out.push(self.config.get(i)));
        out
    }

    /// Every disk near `p` that takes part in its local energy: window
    /// points, frozen outside points and periodic images, with types.
    fn neighbours(&self, p: &MarkedPoint, rad: f64) -> Vec<(MarkedPoint, u16)> {
        let mut out = Vec::new();
        let cfg = &self.config;
        match &self.boundary {
            Boundary::Free => cfg.for_each_near(p.x, p.y, rad, |i| out.push((cfg.get(i), cfg.label(i)))),
            Boundary::FixedOutside(outside) => {
                cfg.for_each_near(p.x, p.y, rad, |i| out.push((cfg.get(i), cfg.label(i))));
                outside.for_each_near(p.x, p.y, rad, |i| out.push((outside.get(i), outside.label(i))));
            }
            Boundary::Periodic => {
                let w = cfg.window();
                let (wx, wy) = (w.width(), w.height());
                for sx in [-wx, 0.0, wx] {
                    for sy in [-wy, 0.0, wy] {
                        cfg.for_each_near(p.x - sx, p.y - sy, rad, |i| {
                            out.push((cfg.get(i).translated(sx, sy), cfg.label(i)))
                        });
                    }
                }
            }
        }
        out
    }

    fn conflicts(&self, p: &MarkedPoint, label: u16) -> bool {
        self.neighbours(p, p.r + self.params.r1)
            .iter()
            .any(|(q, l)| *l != label && hardcore_touch(p, q))
    }

    /// Local energy `h(p, ω ∪ boundary)` and the window-only delta. The
    /// point itself must not be in the configuration.
    fn local_terms(&self, p: &MarkedPoint) -> Result<(f64, Option<LocalDelta>)> {
        let theta = self.params.theta;
        let eps = self.config.eps();
        let rad = local_radius(p.r, self.params.r1);
        if theta.is_zero() {
            return Ok((0.0, None));
        }
        let near: Vec<MarkedPoint> = self.neighbours(p, rad).into_iter().map(|(q, _)| q).collect();
        let d = local_delta(p, &near, eps)?;
        let window_only = matches!(self.boundary, Boundary::Free).then_some(d);
        Ok((d.energy(&theta), window_only))
    }

    fn window_delta(&self, p: &MarkedPoint, known: Option<LocalDelta>) -> Result<LocalDelta> {
        match known {
            Some(d) => Ok(d),
            None => local_delta(p, &self.window_near(p), self.config.eps()),
        }
    }

    /// Log Metropolis–Hastings ratio (before the min with 1) of adding `p`
    /// with type `label`; `-inf` when the hardcore rule forbids it.
    pub fn log_birth_ratio(&self, p: &MarkedPoint, label: u16) -> Result<f64> {
        if self.k > 1 && self.conflicts(p, label) {
            return Ok(f64::NEG_INFINITY);
        }
        let (h, _) = self.local_terms(p)?;
        let n = self.config.len() as f64;
        Ok((self.mean_poisson_count() / (n + 1.0)).ln() - h)
    }

    /// Log Metropolis–Hastings ratio of removing point `i`.
    pub fn log_death_ratio(&self, i: usize) -> Result<f64> {
        let mut rest = self.clone();
        let (p, _) = rest.config.remove(i);
        let (h, _) = rest.local_terms(&p)?;
        let n = self.config.len() as f64;
        Ok((n / self.mean_poisson_count()).ln() + h)
    }

    /// One proposal. Degenerate kernel arrangements reject the proposal.
    pub fn step(&mut self) -> Result<(MoveKind, bool)> {
        self.step += 1;
        let u: f64 = self.rng.random();
        let kind = if u < self.mix.birth {
            MoveKind::Birth
        } else if u < self.mix.birth + self.mix.death {
            MoveKind::Death
        } else {
            MoveKind::Translate
        };
        let outcome = match kind {
            MoveKind::Birth => self.birth(),
            MoveKind::Death => self.death(),
            MoveKind::Translate => self.translate(),
        };
        let accepted = match outcome {
            Ok(a) => a,
            Err(Error::DegenerateGeometry(msg)) => {
                log::debug!("step {}: degenerate proposal rejected: {msg}", self.step);
                self.stats.degenerate += 1;
                false
            }
            Err(e) => return Err(e),
        };
        let slot = kind as usize;
        self.stats.proposed[slot] += 1;
        self.stats.accepted[slot] += u64::from(accepted);
        self.last = (kind, accepted);
        let limit = 50.0 * self.mean_poisson_count();
        if self.config.len() as f64 > limit {
            return Err(Error::Explosion {
                n: self.config.len(),
                limit,
                step: self.step,
            });
        }
        Ok((kind, accepted))
    }

    fn accept(&mut self, log_ratio: f64) -> bool {
        if log_ratio >= 0.0 {
            // Still consume a draw so that the stream does not depend on
            // the sign of the ratio.
            let _: f64 = self.rng.random();
            return true;
        }
        let u: f64 = self.rng.random();
        u < log_ratio.exp()
    }

    fn birth(&mut self) -> Result<bool> {
        let (p, label) = self.draw_point();
        if self.k > 1 && self.conflicts(&p, label) {
            return Ok(false);
        }
        let (h, known) = self.local_terms(&p)?;
        let n = self.config.len() as f64;
        let log_ratio = (self.mean_poisson_count() / (n + 1.0)).ln() - h;
        if !self.accept(log_ratio) {
            return Ok(false);
        }
        let d = self.window_delta(&p, known)?;
        self.config.insert_labeled(p, label)?;
        self.cache.apply(&d, 1.0);
        Ok(true)
    }

    fn death(&mut self) -> Result<bool> {
        let n = self.config.len();
        if n == 0 {
            return Ok(false);
        }
        let i = self.rng.random_range(0..n);
        let (p, label) = self.config.remove(i);
        let result = self.local_terms(&p).and_then(|(h, known)| {
            let log_ratio = (n as f64 / self.mean_poisson_count()).ln() + h;
            if self.accept(log_ratio) {
                self.window_delta(&p, known).map(Some)
            } else {
                Ok(None)
            }
        });
        match result {
            Ok(Some(d)) => {
                self.cache.apply(&d, -1.0);
                Ok(true)
            }
            Ok(None) => {
                self.reinsert(i, p, label);
                Ok(false)
            }
            Err(e) => {
                self.reinsert(i, p, label);
                Err(e)
            }
        }
    }

    fn translate(&mut self) -> Result<bool> {
        let n = self.config.len();
        if n == 0 {
            return Ok(false);
        }
        let i = self.rng.random_range(0..n);
        let w = self.config.window();
        let scale = self.mix.translate_scale * self.params.r0;
        let normal = Normal::new(0.0, scale).expect("scale validated");
        let (dx, dy) = (normal.sample(&mut self.rng), normal.sample(&mut self.rng));
        let (p, label) = self.config.remove(i);
        let (x, y) = match self.boundary {
            Boundary::Periodic => (wrap(p.x + dx, w.x0, w.x1), wrap(p.y + dy, w.y0, w.y1)),
            _ => (reflect(p.x + dx, w.x0, w.x1), reflect(p.y + dy, w.y0, w.y1)),
        };
        let q = MarkedPoint::new(x, y, p.r);
        if self.k > 1 && self.conflicts(&q, label) {
            self.reinsert(i, p, label);
            return Ok(false);
        }
        let result = (|| {
            let (h_old, known_old) = self.local_terms(&p)?;
            let (h_new, known_new) = self.local_terms(&q)?;
            if !self.accept(h_old - h_new) {
                return Ok(None);
            }
            let d_old = self.window_delta(&p, known_old)?;
            let d_new = self.window_delta(&q, known_new)?;
            Ok(Some((d_old, d_new)))
        })();
        match result {
            Ok(Some((d_old, d_new))) => {
                self.config.insert_labeled(q, label)?;
                self.reinsert_order(i);
                self.cache.apply(&d_old, -1.0);
                self.cache.apply(&d_new, 1.0);
                Ok(true)
            }
            Ok(None) => {
                self.reinsert(i, p, label);
                Ok(false)
            }
            Err(e) => {
                self.reinsert(i, p, label);
                Err(e)
            }
        }
    }

    /// Puts a removed point back at index `i`.
    fn reinsert(&mut self, i: usize, p: MarkedPoint, label: u16) {
        self.config.insert_labeled(p, label).expect("point was valid");
        self.reinsert_order(i);
    }

    /// After `remove(i)` and an insert, moves the inserted point back to
    /// index `i` so that indices of other points are unchanged.
    fn reinsert_order(&mut self, i: usize) {
        let last = self.config.len() - 1;
        self.config.swap(i, last);
    }

    /// Record of the current state.
    pub fn record(&self) -> TraceRecord {
        let (_, components) = component_labels(&self.config);
        let mut type_counts = vec![0; self.k as usize];
        for &l in self.config.labels() {
            type_counts[l as usize] += 1;
        }
        TraceRecord {
            step: self.step,
            n: self.config.len(),
            area: self.cache.area,
            perimeter: self.cache.perimeter,
            euler: self.cache.euler,
            components,
            holes: (components as i64 - self.cache.euler).max(0) as usize,
            accepted: self.last.1,
            move_kind: self.last.0,
            type_counts,
        }
    }

    /// Compares the cached functionals with a recomputation.
    pub fn cache_check(&self) -> Result<()> {
        let f = functionals(&self.config)?;
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-7 * a.abs().max(b.abs()).max(1.0);
        if !close(f.area, self.cache.area)
            || !close(f.perimeter, self.cache.perimeter)
            || f.euler != self.cache.euler
        {
            return Err(Error::CacheMismatch(format!(
                "step {}: cached (area {}, perimeter {}, euler {}) vs recomputed ({}, {}, {})",
                self.step,
                self.cache.area,
                self.cache.perimeter,
                self.cache.euler,
                f.area,
                f.perimeter,
                f.euler
            )));
        }
        Ok(())
    }

    /// A pair of distinct-type disks that overlap or touch, if any.
    pub fn hardcore_violation(&self) -> Option<(usize, usize)> {
        hardcore_violation(&self.config)
    }
}

fn on_edge(w: &Rect, p: &MarkedPoint) -> bool {
    p.x == w.x0 || p.x == w.x1 || p.y == w.y0 || p.y == w.y1
}

/// `|x − y| − R − R′ <= 0`, the hardcore exclusion between distinct types.
pub fn hardcore_touch(a: &MarkedPoint, b: &MarkedPoint) -> bool {
    a.dist(b) - a.r - b.r <= 0.0
}

/// First pair of points with different labels that overlap or touch.
pub fn hardcore_violation(config: &Configuration) -> Option<(usize, usize)> {
    let r1 = config.bounds().r1;
    for (i, p) in config.points().iter().enumerate() {
        let mut hit = None;
        config.for_each_near(p.x, p.y, p.r + r1, |j| {
            if hit.is_none()
                && j > i
                && config.label(j) != config.label(i)
                && hardcore_touch(p, &config.get(j))
            {
                hit = Some(j);
            }
        });
        if let Some(j) = hit {
            return Some((i, j));
        }
    }
    None
}

fn reflect(mut v: f64, lo: f64, hi: f64) -> f64 {
    let w = hi - lo;
    if w <= 0.0 {
        return lo;
    }
    v = (v - lo).rem_euclid(2.0 * w);
    if v > w {
        v = 2.0 * w - v;
    }
    (lo + v).clamp(lo, hi)
}

fn wrap(v: f64, lo: f64, hi: f64) -> f64 {
    let w = hi - lo;
    if w <= 0.0 {
        return lo;
    }
    (lo + (v - lo).rem_euclid(w)).clamp(lo, hi)
}

/// Options of [`run_chain`].
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub n_steps: u64,
    /// Steps discarded before the first record; `None` means 20%.
    pub burn_in: Option<u64>,
    /// Steps between records; `None` means `z·λ(Λ)` rounded up.
    pub thinning: Option<u64>,
    pub seed: u64,
    /// Independent RNG stream, e.g. the replica index.
    pub stream: u64,
    /// Steps between cache checks; 0 disables the periodic check.
    pub check_every: u64,
    pub mix: MoveMix,
    pub poisson_init: bool,
}

impl RunOptions {
    pub fn new(n_steps: u64, seed: u64) -> Self {
        Self {
            n_steps,
            burn_in: None,
            thinning: None,
            seed,
            stream: 0,
            check_every: 10_000,
            mix: MoveMix::default(),
            poisson_init: false,
        }
    }

    pub fn burn_in_for(&self) -> u64 {
        self.burn_in.unwrap_or(self.n_steps / 5)
    }

    pub fn thinning_for(&self, params: &QuermassParams, window: &Rect) -> u64 {
        self.thinning
            .unwrap_or_else(|| (params.z * window.area()).ceil().max(1.0) as u64)
            .max(1)
    }
}

/// Runs one chain and returns the records and the final state. `observe` is
/// called with the state at every record.
pub fn run_chain(
    params: &QuermassParams,
    window: Rect,
    boundary: Boundary,
    k: u16,
    opts: &RunOptions,
    mut observe: impl FnMut(&ChainState, &TraceRecord),
) -> Result<(Vec<TraceRecord>, ChainState)> {
    if opts.n_steps == 0 {
        return Err(Error::InvalidParams("nSteps must be >= 1".into()));
    }
    if !(window.is_valid() && window.area() > 0.0) {
        return Err(Error::InvalidParams("window must have positive area".into()));
    }
    let rng = chain_rng(opts.seed, opts.stream);
    let mut state = ChainState::new(params.clone(), window, boundary, k, rng)?;
    state.set_move_mix(opts.mix)?;
    if opts.poisson_init {
        state.poisson_init()?;
    }
    let burn_in = opts.burn_in_for();
    let thinning = opts.thinning_for(params, &window);
    let mut records = Vec::new();
    for s in 1..=opts.n_steps {
        state.step()?;
        if opts.check_every > 0 && s % opts.check_every == 0 {
            state.cache_check()?;
        }
        if s > burn_in && (s - burn_in) % thinning == 0 {
            let rec = state.record();
            observe(&state, &rec);
            records.push(rec);
        }
    }
    state.cache_check()?;
    Ok((records, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn state(theta: Theta, k: u16) -> ChainState {
        let params = QuermassParams::new(theta, 1.0, 0.5, 1.0, RadiusLaw::Uniform { lo: 0.5, hi: 1.0 }).unwrap();
        let mut s = ChainState::new(params, Rect::square(8.0), Boundary::Free, k, chain_rng(7, 0)).unwrap();
        s.poisson_init().unwrap();
        s
    }

    #[test]
    fn sandwich_bounds_examples() {
        let p = |t: Theta, r0: f64, r1: f64| QuermassParams::new(t, 1.0, r0, r1, RadiusLaw::Fixed { r: r0 }).unwrap();
        assert_eq!(poisson_sandwich_bounds(&p(Theta::ZERO, 1.0, 1.0)).unwrap(), (0.0, 0.0));
        let (c0, c1) = poisson_sandwich_bounds(&p(Theta::new(1.0, 0.0, 0.0), 1.0, 1.0)).unwrap();
        assert_eq!(c0, 0.0);
        assert!((c1 - PI).abs() < 1e-12);
        let (c0, c1) = poisson_sandwich_bounds(&p(Theta::new(0.0, 1.0, 0.0), 1.0, 1.0)).unwrap();
        assert!((c0 + 8.0 * PI).abs() < 1e-12 && (c1 - 2.0 * PI).abs() < 1e-12);
        assert!(matches!(
            poisson_sandwich_bounds(&p(Theta::new(0.0, 0.0, 1.0), 1.0, 1.0)),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn boolean_birth_ratio() {
        let s = state(Theta::ZERO, 1);
        let n = s.config().len() as f64;
        let got = s.log_birth_ratio(&MarkedPoint::new(4.0, 4.0, 0.7), 0).unwrap();
        assert!((got - (64.0 / (n + 1.0)).ln()).abs() < 1e-12);
    }

    #[test]
    fn birth_then_death_ratios_cancel() {
        let mut s = state(Theta::new(0.3, -0.2, 0.7), 1);
        let p = MarkedPoint::new(3.3, 4.1, 0.8);
        let up = s.log_birth_ratio(&p, 0).unwrap();
        s.config.insert_labeled(p, 0).unwrap();
        let i = s.config().len() - 1;
        let down = s.log_death_ratio(i).unwrap();
        assert!((up + down).abs() < 1e-9, "{up} + {down}");
    }

    #[test]
    fn touching_opposite_type_is_rejected() {
        let params = QuermassParams::boolean(1.0, 1.0).unwrap();
        let mut cfg = Configuration::new(Rect::square(10.0), params.bounds()).unwrap();
        cfg.insert_labeled(MarkedPoint::new(3.0, 5.0, 1.0), 0).unwrap();
        let s = ChainState::with_config(params, cfg, Boundary::Free, 2, chain_rng(1, 0)).unwrap();
        let touching = MarkedPoint::new(5.0, 5.0, 1.0);
        assert_eq!(s.log_birth_ratio(&touching, 1).unwrap(), f64::NEG_INFINITY);
        assert!(s.log_birth_ratio(&touching, 0).unwrap().is_finite());
        assert!(s.log_birth_ratio(&MarkedPoint::new(5.0 + 1e-9, 5.0, 1.0), 1).unwrap().is_finite());
    }

    #[test]
    fn cache_tracks_moves() {
        for theta in [Theta::ZERO, Theta::new(0.2, 0.1, -0.3)] {
            let mut s = state(theta, 1);
            for _ in 0..3000 {
                s.step().unwrap();
            }
            s.cache_check().unwrap();
            assert_eq!(s.record().n, s.config().len());
        }
    }

    #[test]
    fn hardcore_holds_along_the_chain() {
        let params = QuermassParams::boolean(1.0, 0.5).unwrap();
        let mut s = ChainState::new(params, Rect::square(6.0), Boundary::Free, 2, chain_rng(3, 1)).unwrap();
        for _ in 0..5000 {
            s.step().unwrap();
            assert!(s.hardcore_violation().is_none());
        }
    }

    #[test]
    fn fixed_outside_and_periodic_run() {
        let params = QuermassParams::new(Theta::new(0.1, 0.1, 0.2), 0.8, 0.5, 0.5, RadiusLaw::Fixed { r: 0.5 }).unwrap();
        let w = Rect::square(5.0);
        let outside = Configuration::with_points(
            Rect::new(-2.0, -2.0, 7.0, 7.0),
            params.bounds(),
            [MarkedPoint::new(-0.3, 2.0, 0.5), MarkedPoint::new(5.4, 1.0, 0.5)],
        )
        .unwrap();
        for boundary in [Boundary::FixedOutside(outside), Boundary::Periodic] {
            let mut s = ChainState::new(params.clone(), w, boundary, 1, chain_rng(9, 0)).unwrap();
            for _ in 0..3000 {
                s.step().unwrap();
            }
            s.cache_check().unwrap();
        }
    }

    #[test]
    fn reflect_and_wrap_stay_inside() {
        assert!((reflect(-0.5, 0.0, 2.0) - 0.5).abs() < 1e-12);
        assert!((reflect(2.5, 0.0, 2.0) - 1.5).abs() < 1e-12);
        assert!((wrap(2.5, 0.0, 2.0) - 0.5).abs() < 1e-12);
        assert!((wrap(-0.5, 0.0, 2.0) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn same_seed_same_trace() {
        let params = QuermassParams::new(Theta::new(0.2, 0.0, -0.4), 1.0, 0.5, 1.0, RadiusLaw::Uniform { lo: 0.5, hi: 1.0 }).unwrap();
        let opts = RunOptions::new(4000, 11);
        let a = run_chain(&params, Rect::square(6.0), Boundary::Free, 1, &opts, |_, _| {}).unwrap().0;
        let b = run_chain(&params, Rect::square(6.0), Boundary::Free, 1, &opts, |_, _| {}).unwrap().0;
        assert_eq!(a, b);
        assert!(!a.is_empty());
    }

    #[test]
    fn trace_csv_header_and_line() {
        let mut buf = Vec::new();
        let rec = state(Theta::ZERO, 2).record();
        write_trace(&mut buf, &[rec]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(TRACE_HEADER));
        assert_eq!(lines.next().unwrap().split(',').count(), 10);
    }
}
