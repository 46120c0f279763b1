use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use quermass::experiments::{
    cmd_multitype, cmd_percolate, cmd_sample, cmd_sweep, cmd_validate, write_meta, ExperimentConfig,
};
use quermass::validation::ValidateOptions;
use quermass::Error;

/// Quermass germ-grain model: sampling, sweeps, multi-type dominance,
/// validation and site percolation.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configuration's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the configuration's output.dir.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for replicas (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one chain; writes trace.csv, snapshot.json and summary.json.
    Sample,
    /// Run every sweep value × replica; writes sweep.csv and sweep_summary.csv.
    Sweep,
    /// K-type dominance statistics; writes multitype.csv and multitype.json.
    Multitype,
    /// Run the property corpus; writes validation.json, exits 1 on failure.
    Validate {
        /// Multiplies every corpus size.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, hide = true)]
        mutate_d_euler: bool,
        #[arg(long, hide = true)]
        oracle_cells_per_r0: Option<f64>,
    },
    /// Site-percolation field and summary; writes sites.csv and percolation.json.
    Percolate,
}

fn load(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Error::Config("--config is required for this command".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn out_dir(cli: &Cli, cfg: Option<&ExperimentConfig>) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| cfg.map(|c| c.output.dir.clone()))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn run(cli: &Cli) -> Result<bool, Error> {
    let name = match &cli.command {
        Command::Sample => "sample",
        Command::Sweep => "sweep",
        Command::Multitype => "multitype",
        Command::Validate { .. } => "validate",
        Command::Percolate => "percolate",
    };
    if let Command::Validate {
        scale,
        mutate_d_euler,
        oracle_cells_per_r0,
    } = &cli.command
    {
        let mut opts = ValidateOptions::default().scaled(*scale).reseeded(cli.seed.unwrap_or(1));
        opts.mutate_d_euler = *mutate_d_euler;
        if let Some(c) = oracle_cells_per_r0 {
            opts.oracle.cells_per_r0 = *c;
        }
        let out = out_dir(cli, None);
        let report = cmd_validate(&opts, &out)?;
        write_meta(&out, name, opts.seed, None)?;
        for p in &report.properties {
            println!("{:<32} {:?} ({} checked, {} skipped, {} violations)", p.name, p.status, p.checked, p.skipped, p.violations);
        }
        return Ok(report.passed);
    }
    let cfg = load(cli)?;
    let out = out_dir(cli, Some(&cfg));
    match cli.command {
        Command::Sample => {
            let r = cmd_sample(&cfg, &out)?;
            println!("{} records, final n = {}, mean n = {:.3}, acceptance {:.3}", r.records, r.final_n, r.mean_n, r.acceptance_rate);
        }
        Command::Sweep => {
            for p in cmd_sweep(&cfg, &out)?.points {
                println!(
                    "value {}: mean n {:.2} ± {:.2}, crossing {:.3} ± {:.3}",
                    p.value, p.mean_n_mean, p.mean_n_se, p.crossing_frequency_mean, p.crossing_frequency_se
                );
            }
        }
        Command::Multitype => {
            let r = cmd_multitype(&cfg, &out)?;
            println!("D = {:.4} ± {:.4} over {} replicas", r.dominance.mean, r.dominance.se, r.replicas);
        }
        Command::Percolate => {
            let r = cmd_percolate(&cfg, &out)?;
            println!(
                "pHat {:.4} (p* = {}), lattice crossing {}, continuum mismatches {}",
                r.summary.p_hat, r.summary.p_star, r.summary.lattice_crossing, r.continuum_mismatches
            );
        }
        Command::Validate { .. } => unreachable!(),
    }
    write_meta(&out, name, cfg.seed, cli.config.as_deref().map(Path::new))?;
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) => 2,
                Error::Explosion { .. } => 3,
                _ => 1,
            })
        }
    }
}
