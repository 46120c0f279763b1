//! Experiment configuration and the commands behind the CLI: single chains,
//! parameter sweeps, the multi-type dominance probe, the validation corpus
//! and site-percolation analysis.
//!
//! Every command is a pure function of `(config, seed)` except for the
//! `meta.json` sidecar, which carries the wall-clock timestamp.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Configuration, Rect, Theta};
use crate::io::{load_config_json, write_config_json};
use crate::oracle::rasterize;
use crate::percolation::{
    continuum_crossing_for_field, crossing, site_field, site_percolation_summary, DiamondGeometry,
    Direction, SiteField, SiteSummary,
};
use crate::sampler::{run_chain, write_trace, Boundary, ChainStats, QuermassParams, RadiusLaw, RunOptions, TraceRecord};
use crate::stats::mean_se;
use crate::validation::{validate, ValidateOptions, ValidationReport};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    /// `[x0, y0, x1, y1]`.
    pub window: [f64; 4],
    #[serde(default)]
    pub chain: ChainConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputConfig,
    /// A saved configuration to analyse instead of sampling (`percolate`).
    #[serde(default)]
    pub input: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ModelConfig {
    /// `[θ1, θ2, θ3]`.
    #[serde(default)]
    pub theta: [f64; 3],
    pub z: f64,
    pub r0: f64,
    pub r1: f64,
    /// Defaults to the fixed radius `r0` when `r0 == r1`, else uniform on
    /// `[r0, r1]`.
    #[serde(default)]
    pub radius_law: Option<RadiusLaw>,
    #[serde(default = "one")]
    pub k: u16,
    #[serde(default)]
    pub boundary: BoundaryConfig,
}

fn one() -> u16 {
    1
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
pub enum BoundaryConfig {
    #[default]
    Free,
    Periodic,
    /// Frozen disks read from a configuration file; relative paths are
    /// resolved against the experiment file's directory.
    FixedOutside { path: PathBuf },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ChainConfig {
    #[serde(default = "default_steps")]
    pub n_steps: u64,
    #[serde(default)]
    pub burn_in: Option<u64>,
    #[serde(default)]
    pub thinning: Option<u64>,
    #[serde(default = "default_replicas")]
    pub n_replicas: usize,
    /// Start from a Poisson sample instead of the empty configuration.
    #[serde(default)]
    pub poisson_init: bool,
}

fn default_steps() -> u64 {
    1_000_000
}

fn default_replicas() -> usize {
    1
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            n_steps: default_steps(),
            burn_in: None,
            thinning: None,
            n_replicas: default_replicas(),
            poisson_init: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    Z,
    Theta1,
    Theta2,
    Theta3,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default = "horizontal")]
    pub crossing_direction: Direction,
    #[serde(default)]
    pub diamond_ell: Option<f64>,
    /// Oracle resolution (cells per `r0`) of a PBM dump of the final
    /// snapshot; no dump when absent.
    #[serde(default)]
    pub mask_cells_per_r0: Option<f64>,
}

fn horizontal() -> Direction {
    Direction::Horizontal
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            crossing_direction: Direction::Horizontal,
            diamond_ell: None,
            mask_cells_per_r0: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out")]
    pub dir: PathBuf,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_out() }
    }
}

/// Line (1-based) of the first occurrence of `"key"` in `text`.
fn line_of(text: &str, key: &str) -> usize {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map_or(1, |i| i + 1)
}

impl ExperimentConfig {
    /// Parses and checks a JSON document. Errors are [`Error::Config`] with
    /// a `origin:line:` prefix.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            let msg = msg.rsplit_once(" at line ").map_or(msg.as_str(), |(m, _)| m);
            Error::Config(format!("{origin}:{}:{}: {msg}", e.line(), e.column()))
        })?;
        if let Err((key, msg)) = cfg.check() {
            return Err(Error::Config(format!("{origin}:{}: {msg}", line_of(text, key))));
        }
        Ok(cfg)
    }

    /// Reads `path`; relative `fixedOutside` and `input` paths become
    /// relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let origin = path.display().to_string();
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{origin}: {e}")))?;
        let mut cfg = Self::parse(&text, &origin)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let BoundaryConfig::FixedOutside { path } = &mut cfg.model.boundary {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
        if let Some(p) = &mut cfg.input {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    fn check(&self) -> std::result::Result<(), (&'static str, String)> {
        let m = &self.model;
        let finite = |v: f64| v.is_finite();
        if !m.theta.iter().copied().all(finite) {
            return Err(("theta", "theta must be finite".into()));
        }
        if !(finite(m.z) && m.z > 0.0) {
            return Err(("z", format!("z must be positive, got {}", m.z)));
        }
        if !(finite(m.r0) && m.r0 > 0.0 && finite(m.r1) && m.r1 >= m.r0) {
            return Err(("r0", format!("need 0 < r0 <= r1, got r0 = {}, r1 = {}", m.r0, m.r1)));
        }
        if m.k == 0 {
            return Err(("k", "k must be at least 1".into()));
        }
        let w = Rect::from(self.window);
        if !(w.is_valid() && w.area() > 0.0) {
            return Err(("window", format!("invalid window {:?}", self.window)));
        }
        if self.chain.n_steps == 0 {
            return Err(("nSteps", "nSteps must be at least 1".into()));
        }
        if self.chain.n_replicas == 0 {
            return Err(("nReplicas", "nReplicas must be at least 1".into()));
        }
        if self.chain.thinning == Some(0) {
            return Err(("thinning", "thinning must be at least 1".into()));
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(("values", "sweep values must be nonempty".into()));
            }
            if !s.values.iter().copied().all(finite) {
                return Err(("values", "sweep values must be finite".into()));
            }
            if s.parameter == SweepParameter::Z && s.values.iter().any(|&v| v <= 0.0) {
                return Err(("values", "z values must be positive".into()));
            }
        }
        if let Some(ell) = self.analysis.diamond_ell {
            if !(ell > 2.0 * m.r1 + 2.0 * m.r0) {
                return Err((
                    "diamondEll",
                    format!("diamondEll = {ell} must exceed 2·r1 + 2·r0 = {}", 2.0 * (m.r1 + m.r0)),
                ));
            }
        }
        if let Some(c) = self.analysis.mask_cells_per_r0 {
            if !(c >= 8.0) {
                return Err(("maskCellsPerR0", "maskCellsPerR0 must be at least 8".into()));
            }
        }
        self.params().map_err(|e| ("model", e.to_string()))?;
        Ok(())
    }

    pub fn window(&self) -> Rect {
        Rect::from(self.window)
    }

    pub fn params(&self) -> Result<QuermassParams> {
        let m = &self.model;
        let law = m.radius_law.clone().unwrap_or(if m.r0 == m.r1 {
            RadiusLaw::Fixed { r: m.r0 }
        } else {
            RadiusLaw::Uniform { lo: m.r0, hi: m.r1 }
        });
        QuermassParams::new(Theta::new(m.theta[0], m.theta[1], m.theta[2]), m.z, m.r0, m.r1, law)
    }

    /// The model with the sweep parameter set to `value`.
    pub fn params_at(&self, parameter: SweepParameter, value: f64) -> Result<QuermassParams> {
        let mut p = self.params()?;
        match parameter {
            SweepParameter::Z => p.z = value,
            SweepParameter::Theta1 => p.theta.theta1 = value,
            SweepParameter::Theta2 => p.theta.theta2 = value,
            SweepParameter::Theta3 => p.theta.theta3 = value,
        }
        p.validate()?;
        Ok(p)
    }

    pub fn boundary(&self) -> Result<Boundary> {
        Ok(match &self.model.boundary {
            BoundaryConfig::Free => Boundary::Free,
            BoundaryConfig::Periodic => Boundary::Periodic,
            BoundaryConfig::FixedOutside { path } => {
                let p = self.params()?;
                Boundary::FixedOutside(load_config_json(path, Some(p.bounds()))?)
            }
        })
    }

    pub fn diamond(&self) -> Result<Option<DiamondGeometry>> {
        self.analysis
            .diamond_ell
            .map(|ell| DiamondGeometry::new(ell, self.model.r0, self.model.r1))
            .transpose()
    }

    /// Run options of replica `replica`: its RNG stream is the replica index.
    pub fn run_options(&self, replica: usize) -> RunOptions {
        let mut o = RunOptions::new(self.chain.n_steps, self.seed);
        o.burn_in = self.chain.burn_in;
        o.thinning = self.chain.thinning;
        o.stream = replica as u64;
        o.poisson_init = self.chain.poisson_init;
        o
    }
}

/// Writes `value` as pretty JSON followed by a newline.
fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// The timestamped sidecar written next to every command's outputs.
pub fn write_meta(out: &Path, command: &str, seed: u64, config: Option<&Path>) -> Result<()> {
    let ts = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    let meta = serde_json::json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": seed,
        "config": config.map(|p| p.display().to_string()),
        "timestampUnix": ts,
    });
    write_json(&out.join("meta.json"), &meta)
}

/// Per-snapshot percolation statistics accumulated over one chain.
#[derive(Clone, Copy, Debug, Default)]
struct PercolationTally {
    snapshots: usize,
    crossings: usize,
    fields: usize,
    p_hat_sum: f64,
    lattice_crossings: usize,
    continuum_checked: usize,
    continuum_violations: usize,
}

impl PercolationTally {
    fn observe(&mut self, config: &Configuration, window: &Rect, dir: Direction, diamond: Option<&DiamondGeometry>) {
        self.snapshots += 1;
        self.crossings += usize::from(crossing(config, window, dir));
        if let Some(g) = diamond {
            if let Ok(field) = site_field(config, g) {
                self.add_field(config, &field);
            }
        }
    }

    fn add_field(&mut self, config: &Configuration, field: &SiteField) {
        let s = site_percolation_summary(field);
        self.fields += 1;
        self.p_hat_sum += s.p_hat;
        if let Some(c) = continuum_crossing_for_field(config, field) {
            self.lattice_crossings += 1;
            self.continuum_checked += 1;
            self.continuum_violations += usize::from(!c);
        }
    }
}

/// Summary of one replica of a sweep point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplicaSummary {
    pub value: Option<f64>,
    pub replica: usize,
    pub records: usize,
    pub mean_n: f64,
    pub mean_area: f64,
    pub mean_perimeter: f64,
    pub mean_euler: f64,
    pub mean_components: f64,
    pub mean_holes: f64,
    pub holes_per_area: f64,
    pub crossing_frequency: f64,
    pub p_hat: Option<f64>,
    pub lattice_crossing_frequency: Option<f64>,
    pub lattice_crossings: usize,
    pub continuum_mismatches: usize,
    pub acceptance_rate: f64,
    pub degenerate_rejections: u64,
}

fn mean_of(records: &[TraceRecord], f: impl Fn(&TraceRecord) -> f64) -> f64 {
    if records.is_empty() {
        return f64::NAN;
    }
    records.iter().map(f).sum::<f64>() / records.len() as f64
}

fn acceptance_rate(stats: &ChainStats) -> f64 {
    let p: u64 = stats.proposed.iter().sum();
    let a: u64 = stats.accepted.iter().sum();
    if p == 0 {
        0.0
    } else {
        a as f64 / p as f64
    }
}

/// Runs replica `replica` of `params` and summarises its records.
pub fn run_replica(
    cfg: &ExperimentConfig,
    params: &QuermassParams,
    value: Option<f64>,
    replica: usize,
) -> Result<ReplicaSummary> {
    let window = cfg.window();
    let diamond = cfg.diamond()?;
    let dir = cfg.analysis.crossing_direction;
    let mut tally = PercolationTally::default();
    let (records, state) = run_chain(
        params,
        window,
        cfg.boundary()?,
        cfg.model.k,
        &cfg.run_options(replica),
        |state, _| tally.observe(state.config(), &window, dir, diamond.as_ref()),
    )?;
    let frac = |a: usize, b: usize| if b == 0 { f64::NAN } else { a as f64 / b as f64 };
    let mean_holes = mean_of(&records, |r| r.holes as f64);
    Ok(ReplicaSummary {
        value,
        replica,
        records: records.len(),
        mean_n: mean_of(&records, |r| r.n as f64),
        mean_area: mean_of(&records, |r| r.area),
        mean_perimeter: mean_of(&records, |r| r.perimeter),
        mean_euler: mean_of(&records, |r| r.euler as f64),
        mean_components: mean_of(&records, |r| r.components as f64),
        mean_holes,
        holes_per_area: mean_holes / window.area(),
        crossing_frequency: frac(tally.crossings, tally.snapshots),
        p_hat: diamond.map(|_| tally.p_hat_sum / tally.fields.max(1) as f64),
        lattice_crossing_frequency: diamond.map(|_| frac(tally.lattice_crossings, tally.fields)),
        lattice_crossings: tally.lattice_crossings,
        continuum_mismatches: tally.continuum_violations,
        acceptance_rate: acceptance_rate(&state.stats()),
        degenerate_rejections: state.stats().degenerate,
    })
}

/// Mean and standard error of a metric over replicas.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
}

impl MeanSe {
    fn of(values: impl Iterator<Item = f64>) -> Self {
        let v: Vec<f64> = values.filter(|x| !x.is_nan()).collect();
        let (mean, se) = mean_se(&v);
        Self { mean, se }
    }
}

/// Aggregate of one sweep value over its replicas.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    pub replicas: usize,
    pub mean_n_mean: f64,
    pub mean_n_se: f64,
    pub holes_per_area_mean: f64,
    pub holes_per_area_se: f64,
    pub euler_mean: f64,
    pub euler_se: f64,
    pub crossing_frequency_mean: f64,
    pub crossing_frequency_se: f64,
    pub p_hat_mean: Option<f64>,
    pub p_hat_se: Option<f64>,
    pub continuum_mismatches: usize,
}

impl SweepPoint {
    fn of(value: f64, rows: &[ReplicaSummary]) -> Self {
        let m = |f: fn(&ReplicaSummary) -> f64| MeanSe::of(rows.iter().map(f));
        let n = m(|r| r.mean_n);
        let h = m(|r| r.holes_per_area);
        let e = m(|r| r.mean_euler);
        let c = m(|r| r.crossing_frequency);
        let p = rows[0].p_hat.map(|_| m(|r| r.p_hat.unwrap_or(f64::NAN)));
        Self {
            value,
            replicas: rows.len(),
            mean_n_mean: n.mean,
            mean_n_se: n.se,
            holes_per_area_mean: h.mean,
            holes_per_area_se: h.se,
            euler_mean: e.mean,
            euler_se: e.se,
            crossing_frequency_mean: c.mean,
            crossing_frequency_se: c.se,
            p_hat_mean: p.map(|p| p.mean),
            p_hat_se: p.map(|p| p.se),
            continuum_mismatches: rows.iter().map(|r| r.continuum_mismatches).sum(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<ReplicaSummary>,
    pub points: Vec<SweepPoint>,
}

/// Every sweep value × replica. Replica `r` uses RNG stream `r` at every
/// value, so values are compared on matched seeds.
pub fn sweep(cfg: &ExperimentConfig) -> Result<SweepReport> {
    let s = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("sweep requires a \"sweep\" section".into()))?;
    let params: Vec<QuermassParams> = s
        .values
        .iter()
        .map(|&v| cfg.params_at(s.parameter, v))
        .collect::<Result<_>>()?;
    let nr = cfg.chain.n_replicas;
    let rows: Vec<ReplicaSummary> = (0..params.len() * nr)
        .into_par_iter()
        .map(|job| run_replica(cfg, &params[job / nr], Some(s.values[job / nr]), job % nr))
        .collect::<Result<_>>()?;
    let points = s
        .values
        .iter()
        .zip(rows.chunks(nr))
        .map(|(&v, chunk)| SweepPoint::of(v, chunk))
        .collect();
    Ok(SweepReport { rows, points })
}

pub fn cmd_sweep(cfg: &ExperimentConfig, out: &Path) -> Result<SweepReport> {
    let report = sweep(cfg)?;
    fs::create_dir_all(out)?;
    write_csv(&out.join("sweep.csv"), &report.rows)?;
    write_csv(&out.join("sweep_summary.csv"), &report.points)?;
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SampleReport {
    pub records: usize,
    pub final_n: usize,
    pub mean_n: f64,
    pub expected_poisson_n: f64,
    pub acceptance_rate: f64,
    pub proposed: [u64; 3],
    pub accepted: [u64; 3],
    pub degenerate_rejections: u64,
}

/// One chain (stream 0): `trace.csv`, `snapshot.json`, optionally
/// `mask.pbm`, and `summary.json`.
pub fn cmd_sample(cfg: &ExperimentConfig, out: &Path) -> Result<SampleReport> {
    let params = cfg.params()?;
    let window = cfg.window();
    let (records, state) = run_chain(&params, window, cfg.boundary()?, cfg.model.k, &cfg.run_options(0), |_, _| {})?;
    fs::create_dir_all(out)?;
    let mut trace = BufWriter::new(File::create(out.join("trace.csv"))?);
    write_trace(&mut trace, &records)?;
    trace.flush()?;
    let mut snap = BufWriter::new(File::create(out.join("snapshot.json"))?);
    write_config_json(state.config(), cfg.model.k > 1, &mut snap)?;
    writeln!(snap)?;
    snap.flush()?;
    if let Some(c) = cfg.analysis.mask_cells_per_r0 {
        let mask = rasterize(state.config(), params.r0 / c)?;
        let mut w = BufWriter::new(File::create(out.join("mask.pbm"))?);
        mask.write_pbm(&mut w)?;
        w.flush()?;
    }
    let stats = state.stats();
    let report = SampleReport {
        records: records.len(),
        final_n: state.config().len(),
        mean_n: mean_of(&records, |r| r.n as f64),
        expected_poisson_n: params.z * window.area(),
        acceptance_rate: acceptance_rate(&stats),
        proposed: stats.proposed,
        accepted: stats.accepted,
        degenerate_rejections: stats.degenerate,
    };
    write_json(&out.join("summary.json"), &report)?;
    Ok(report)
}

/// Dominance statistics of one multi-type replica.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultitypeReplica {
    pub replica: usize,
    pub records: usize,
    pub empty_records: usize,
    pub mean_n: f64,
    /// Mean count of each type per unit area, `;`-separated.
    pub type_densities: String,
    /// `max_k n̄_k / n̄` from the time-averaged type counts.
    pub dominance: f64,
    /// Mean of `max_k n_k / n` over nonempty records.
    pub snapshot_dominance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn of(values: &[f64], lo: f64, hi: f64, bins: usize) -> Self {
        let mut counts = vec![0; bins];
        for &v in values.iter().filter(|v| !v.is_nan()) {
            let b = (((v - lo) / (hi - lo)) * bins as f64).floor().clamp(0.0, (bins - 1) as f64);
            counts[b as usize] += 1;
        }
        Self { lo, hi, counts }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MultitypeReport {
    pub k: u16,
    pub replicas: usize,
    pub dominance: MeanSe,
    pub snapshot_dominance: MeanSe,
    pub type_densities: Vec<MeanSe>,
    pub dominance_histogram: Histogram,
    #[serde(skip)]
    pub rows: Vec<MultitypeReplica>,
}

pub fn multitype(cfg: &ExperimentConfig) -> Result<MultitypeReport> {
    let k = cfg.model.k;
    if k < 2 {
        return Err(Error::Config("multitype requires k >= 2".into()));
    }
    let params = cfg.params()?;
    let window = cfg.window();
    let boundary = cfg.boundary()?;
    let rows: Vec<MultitypeReplica> = (0..cfg.chain.n_replicas)
        .into_par_iter()
        .map(|r| -> Result<MultitypeReplica> {
            let (records, _) = run_chain(&params, window, boundary.clone(), k, &cfg.run_options(r), |_, _| {})?;
            let mut totals = vec![0usize; k as usize];
            let (mut snap_sum, mut nonempty) = (0.0, 0);
            for rec in &records {
                for (t, c) in totals.iter_mut().zip(&rec.type_counts) {
                    *t += c;
                }
                if rec.n > 0 {
                    nonempty += 1;
                    snap_sum += *rec.type_counts.iter().max().unwrap_or(&0) as f64 / rec.n as f64;
                }
            }
            let all: usize = totals.iter().sum();
            let nrec = records.len().max(1) as f64;
            Ok(MultitypeReplica {
                replica: r,
                records: records.len(),
                empty_records: records.len() - nonempty,
                mean_n: all as f64 / nrec,
                type_densities: totals
                    .iter()
                    .map(|&t| (t as f64 / nrec / window.area()).to_string())
                    .collect::<Vec<_>>()
                    .join(";"),
                dominance: if all == 0 {
                    f64::NAN
                } else {
                    *totals.iter().max().unwrap_or(&0) as f64 / all as f64
                },
                snapshot_dominance: if nonempty == 0 { f64::NAN } else { snap_sum / nonempty as f64 },
            })
        })
        .collect::<Result<_>>()?;
    let d: Vec<f64> = rows.iter().map(|r| r.dominance).collect();
    let type_densities = (0..k as usize)
        .map(|t| {
            MeanSe::of(rows.iter().map(|r| {
                r.type_densities.split(';').nth(t).and_then(|s| s.parse().ok()).unwrap_or(f64::NAN)
            }))
        })
        .collect();
    Ok(MultitypeReport {
        k,
        replicas: rows.len(),
        dominance: MeanSe::of(d.iter().copied()),
        snapshot_dominance: MeanSe::of(rows.iter().map(|r| r.snapshot_dominance)),
        type_densities,
        dominance_histogram: Histogram::of(&d, 1.0 / k as f64, 1.0, 10),
        rows,
    })
}

pub fn cmd_multitype(cfg: &ExperimentConfig, out: &Path) -> Result<MultitypeReport> {
    let report = multitype(cfg)?;
    fs::create_dir_all(out)?;
    write_csv(&out.join("multitype.csv"), &report.rows)?;
    write_json(&out.join("multitype.json"), &report)?;
    Ok(report)
}

pub fn cmd_validate(opts: &ValidateOptions, out: &Path) -> Result<ValidationReport> {
    let report = validate(opts);
    fs::create_dir_all(out)?;
    write_json(&out.join("validation.json"), &report)?;
    Ok(report)
}

/// Per-replica site-percolation statistics over a chain's snapshots.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PercolationReplica {
    pub replica: usize,
    pub snapshots: usize,
    pub p_hat: f64,
    pub lattice_crossing_frequency: f64,
    pub continuum_crossing_frequency: f64,
    pub lattice_crossings: usize,
    pub continuum_mismatches: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PercolationReport {
    pub ell: f64,
    /// Site summary of the analysed configuration (the input file, or the
    /// final state of replica 0).
    pub summary: SiteSummary,
    pub continuum_crossing: Option<bool>,
    pub p_hat: Option<MeanSe>,
    pub lattice_crossing_frequency: Option<MeanSe>,
    pub lattice_crossings: usize,
    pub continuum_mismatches: usize,
    #[serde(skip)]
    pub rows: Vec<PercolationReplica>,
    #[serde(skip)]
    pub field: SiteField,
}

/// Site field of the `input` configuration, or of every snapshot of
/// `nReplicas` chains.
pub fn percolate(cfg: &ExperimentConfig) -> Result<PercolationReport> {
    let geom = cfg
        .diamond()?
        .ok_or_else(|| Error::Config("percolate requires analysis.diamondEll".into()))?;
    if let Some(path) = &cfg.input {
        let params = cfg.params()?;
        let config = load_config_json(path, Some(params.bounds()))?;
        let field = site_field(&config, &geom)?;
        let continuum = continuum_crossing_for_field(&config, &field);
        return Ok(PercolationReport {
            ell: geom.ell,
            summary: site_percolation_summary(&field),
            continuum_crossing: continuum,
            p_hat: None,
            lattice_crossing_frequency: None,
            lattice_crossings: usize::from(continuum.is_some()),
            continuum_mismatches: usize::from(continuum == Some(false)),
            rows: Vec::new(),
            field,
        });
    }
    let params = cfg.params()?;
    let window = cfg.window();
    let boundary = cfg.boundary()?;
    let results: Vec<(PercolationReplica, Configuration)> = (0..cfg.chain.n_replicas)
        .into_par_iter()
        .map(|r| -> Result<_> {
            let mut tally = PercolationTally::default();
            let (_, state) = run_chain(&params, window, boundary.clone(), cfg.model.k, &cfg.run_options(r), |s, _| {
                if let Ok(field) = site_field(s.config(), &geom) {
                    tally.snapshots += 1;
                    tally.add_field(s.config(), &field);
                }
            })?;
            let frac = |a: usize| if tally.fields == 0 { f64::NAN } else { a as f64 / tally.fields as f64 };
            let row = PercolationReplica {
                replica: r,
                snapshots: tally.snapshots,
                p_hat: if tally.fields == 0 { f64::NAN } else { tally.p_hat_sum / tally.fields as f64 },
                lattice_crossing_frequency: frac(tally.lattice_crossings),
                continuum_crossing_frequency: frac(tally.lattice_crossings - tally.continuum_violations),
                lattice_crossings: tally.lattice_crossings,
                continuum_mismatches: tally.continuum_violations,
            };
            Ok((row, state.config().clone()))
        })
        .collect::<Result<_>>()?;
    let last = &results[0].1;
    let field = site_field(last, &geom)?;
    let rows: Vec<PercolationReplica> = results.iter().map(|(r, _)| r.clone()).collect();
    Ok(PercolationReport {
        ell: geom.ell,
        summary: site_percolation_summary(&field),
        continuum_crossing: continuum_crossing_for_field(last, &field),
        p_hat: Some(MeanSe::of(rows.iter().map(|r| r.p_hat))),
        lattice_crossing_frequency: Some(MeanSe::of(rows.iter().map(|r| r.lattice_crossing_frequency))),
        lattice_crossings: rows.iter().map(|r| r.lattice_crossings).sum(),
        continuum_mismatches: rows.iter().map(|r| r.continuum_mismatches).sum(),
        rows,
        field,
    })
}

pub fn cmd_percolate(cfg: &ExperimentConfig, out: &Path) -> Result<PercolationReport> {
    let report = percolate(cfg)?;
    fs::create_dir_all(out)?;
    let mut w = BufWriter::new(File::create(out.join("sites.csv"))?);
    report.field.write_csv(&mut w)?;
    w.flush()?;
    if !report.rows.is_empty() {
        write_csv(&out.join("percolation.csv"), &report.rows)?;
    }
    write_json(&out.join("percolation.json"), &report)?;
    Ok(report)
}
