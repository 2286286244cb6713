//! Command-line front end: resolves a [`RunConfig`], runs one analysis over a Cartesian
//! parameter sweep and writes per-cell CSV/JSON files plus a `manifest.json` written last.
//!
//! Every flag can also be set from the environment with the `NDSE_` prefix
//! (`NDSE_SYSTEM`, `NDSE_GRID`, `NDSE_ALPHA`, `NDSE_EPS`, `NDSE_DELTA`, `NDSE_N`,
//! `NDSE_JOBS`, `NDSE_SEED`, `NDSE_OUT`, `NDSE_TRIALS`, `NDSE_LENGTH`).
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration or input error,
//! 3 analysis error such as a system that is not chain mixing.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::bounds::{entropy_lower_bound, fix_growth_entropy, mixing_time_lower_bound};
use crate::bowen::{entropy_estimate, entropy_estimate_on, BowenParams};
use crate::corpus::{load_fixture, FIXTURE_NAMES};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::pseudograph::{
    periodic_pseudo_entropy, pseudo_entropy, random_pseudo_orbit, shadowing_witness,
};
use crate::recurrence::{
    chain_mixing_time, chain_recurrent_set, default_confirm_horizon, encode_ranges,
    recurrence_report, ChainReach,
};
use crate::sysfile::parse_system_file;
use crate::systems::{lipschitz_constant, MapSequence};

/// Trace-regression window used by `verify` for the periodic pseudo-entropy.
pub const VERIFY_TRACE_WINDOW: (usize, usize) = (10, 30);
/// (δ, ε) grid used by `verify` for the mixing-time checks.
pub const VERIFY_DELTAS: [f64; 3] = [0.02, 0.05, 0.1];
pub const VERIFY_MIXING_EPS: [f64; 2] = [0.01, 0.02];
pub const TOL_ENTROPY: f64 = 0.15;
pub const TOL_TRACE: f64 = 0.05;
pub const TOL_LOWER_BOUND: f64 = 0.1;
pub const TOL_CR: f64 = 0.1;
/// Quantisation slack allowed when comparing a measured mixing time with its bound.
pub const MIXING_SLACK: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Bowen entropy from maximal (n, ε)-separated sets; sweeps ε and reports the maximum.
    Entropy,
    /// Entropy from counts of ε-distinguishable α-pseudo-orbits.
    PseudoEntropy,
    /// Growth rate of periodic α-pseudo-orbits.
    PeriodicEntropy,
    /// Chain-recurrent set, chain classes and transitivity.
    Recurrence,
    /// Chain mixing time over an (ε, δ) sweep.
    MixingTime,
    /// Mixing-time bounds table and entropy lower bounds.
    Bounds,
    /// Fraction of random α-pseudo-orbits traced within ε.
    Shadowing,
    /// Cross-checks between the entropy notions; exits 1 on any violation.
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Entropy => "entropy",
            Command::PseudoEntropy => "pseudo-entropy",
            Command::PeriodicEntropy => "periodic-entropy",
            Command::Recurrence => "recurrence",
            Command::MixingTime => "mixing-time",
            Command::Bounds => "bounds",
            Command::Shadowing => "shadowing",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "nds-entropy",
    version,
    about = "Entropy and chain recurrence of non-autonomous interval maps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// Fixture name or path to a system definition file.
    #[arg(long, global = true, env = "NDSE_SYSTEM")]
    pub system: Option<String>,
    /// Number of grid cells N.
    #[arg(long, global = true, env = "NDSE_GRID")]
    pub grid: Option<usize>,
    /// Pseudo-orbit jump sizes, comma separated.
    #[arg(long, global = true, env = "NDSE_ALPHA", value_delimiter = ',')]
    pub alpha: Vec<f64>,
    /// Separation scales, comma separated.
    #[arg(long, global = true, env = "NDSE_EPS", value_delimiter = ',')]
    pub eps: Vec<f64>,
    /// Ball radii for mixing times, comma separated.
    #[arg(long, global = true, env = "NDSE_DELTA", value_delimiter = ',')]
    pub delta: Vec<f64>,
    /// Inclusive length window, written A..B.
    #[arg(long, global = true, env = "NDSE_N", value_parser = parse_window)]
    pub n: Option<(usize, usize)>,
    /// Worker threads for the sweep.
    #[arg(long, global = true, env = "NDSE_JOBS")]
    pub jobs: Option<usize>,
    #[arg(long, global = true, env = "NDSE_SEED")]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, env = "NDSE_OUT")]
    pub out: Option<PathBuf>,
    /// Number of random pseudo-orbits drawn by `shadowing` and `verify`.
    #[arg(long, global = true, env = "NDSE_TRIALS")]
    pub trials: Option<usize>,
    /// Pseudo-orbit length for `shadowing`.
    #[arg(long, global = true, env = "NDSE_LENGTH")]
    pub length: Option<usize>,
}

fn parse_window(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s
        .split_once("..=")
        .or_else(|| s.split_once(".."))
        .ok_or_else(|| format!("expected A..B, got `{s}`"))?;
    let a: usize = a
        .trim()
        .parse()
        .map_err(|_| format!("bad window start in `{s}`"))?;
    let b: usize = b
        .trim()
        .parse()
        .map_err(|_| format!("bad window end in `{s}`"))?;
    Ok((a, b))
}

/// Fully resolved run parameters; recorded verbatim in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub system: String,
    pub grid_size: usize,
    pub alpha: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub delta: Vec<f64>,
    pub n_min: usize,
    pub n_max: usize,
    pub seed: u64,
    pub jobs: usize,
    pub trials: usize,
    pub length: usize,
    pub output_dir: PathBuf,
}

fn sorted(mut xs: Vec<f64>) -> Vec<f64> {
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

impl RunConfig {
    /// Fills command-specific defaults for every option left unset.
    pub fn resolve(command: Command, o: &Options) -> Result<Self> {
        use Command::*;
        let system = o
            .system
            .clone()
            .ok_or_else(|| Error::Config("--system is required".into()))?;
        let grid_size = o
            .grid
            .unwrap_or(if command == Shadowing { 100_000 } else { 2000 });
        if grid_size < 2 {
            return Err(Error::Config(format!(
                "grid size must be at least 2, got {grid_size}"
            )));
        }
        let or = |given: &[f64], default: &[f64]| {
            sorted(if given.is_empty() {
                default.to_vec()
            } else {
                given.to_vec()
            })
        };
        let spacing = 1.0 / grid_size as f64;
        let alpha = or(
            &o.alpha,
            &[if command == Shadowing { 1e-4 } else { spacing }],
        );
        let epsilon = or(
            &o.eps,
            match command {
                MixingTime => &[0.02],
                Bounds => &VERIFY_MIXING_EPS,
                Shadowing => &[0.01],
                Recurrence => &[],
                _ => &[0.05],
            },
        );
        let delta = or(
            &o.delta,
            match command {
                MixingTime => &[0.1],
                Bounds => &VERIFY_DELTAS,
                _ => &[],
            },
        );
        let (n_min, n_max) = o.n.unwrap_or(if command == PeriodicEntropy {
            VERIFY_TRACE_WINDOW
        } else {
            (1, 5)
        });
        let cfg = RunConfig {
            system,
            grid_size,
            alpha,
            epsilon,
            delta,
            n_min,
            n_max,
            seed: o.seed.unwrap_or(0),
            jobs: o.jobs.unwrap_or_else(rayon::current_num_threads),
            trials: o.trials.unwrap_or(100),
            length: o.length.unwrap_or(50),
            output_dir: o.out.clone().unwrap_or_else(|| PathBuf::from("out")),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, xs) in [
            ("alpha", &self.alpha),
            ("eps", &self.epsilon),
            ("delta", &self.delta),
        ] {
            if let Some(x) = xs.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
                return Err(Error::Config(format!(
                    "--{name} values must be positive, got {x}"
                )));
            }
            if xs.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Config(format!("--{name} list must be sorted")));
            }
        }
        if self.n_min == 0 || self.n_min > self.n_max {
            return Err(Error::Config(format!(
                "window {}..{} must satisfy 1 <= A <= B",
                self.n_min, self.n_max
            )));
        }
        if self.jobs == 0 || self.trials == 0 || self.length == 0 {
            return Err(Error::Config(
                "--jobs, --trials and --length must be positive".into(),
            ));
        }
        Ok(())
    }

    fn require(&self, name: &str, xs: &[f64]) -> Result<()> {
        if xs.is_empty() {
            return Err(Error::Config(format!("this command needs --{name}")));
        }
        Ok(())
    }

    fn bowen(&self, eps: f64) -> BowenParams {
        BowenParams {
            epsilon: eps,
            n_min: self.n_min,
            n_max: self.n_max,
            grid_size: self.grid_size,
        }
    }
}

/// Fixture name or definition-file path to a map sequence.
pub fn load_system(spec: &str) -> Result<MapSequence> {
    if FIXTURE_NAMES.contains(&spec) {
        return Ok(load_fixture(spec)?.system);
    }
    let path = Path::new(spec);
    if path.exists() {
        return parse_system_file(path);
    }
    Err(Error::UnknownFixture {
        name: spec.to_string(),
        available: FIXTURE_NAMES.join(", "),
    })
}

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_analysis() {
        3
    } else {
        2
    }
}

/// Result of a completed run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub exit_code: i32,
    /// Text printed to stdout.
    pub report: String,
    /// Files written, relative to the output directory, in write order.
    pub files: Vec<String>,
}

struct Sink {
    dir: PathBuf,
    files: Vec<String>,
    report: String,
}

impl Sink {
    fn write(&mut self, name: &str, content: &str) -> Result<()> {
        std::fs::write(self.dir.join(name), content)
            .map_err(|e| Error::Io(format!("{}: {e}", self.dir.join(name).display())))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string(value).expect("records serialise");
        s.push('\n');
        self.write(name, &s)
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.report.push_str(s.as_ref());
        self.report.push('\n');
    }
}

/// Runs `command`, writing its artifacts and finally `manifest.json` to the output directory.
pub fn run(command: Command, config: &RunConfig) -> Result<RunOutcome> {
    let start = Instant::now();
    config.validate()?;
    let f = load_system(&config.system)?;
    std::fs::create_dir_all(&config.output_dir)
        .map_err(|e| Error::Io(format!("{}: {e}", config.output_dir.display())))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let mut sink = Sink {
        dir: config.output_dir.clone(),
        files: Vec::new(),
        report: String::new(),
    };
    let passed = pool.install(|| match command {
        Command::Entropy => cmd_entropy(&f, config, &mut sink),
        Command::PseudoEntropy => cmd_pseudo(&f, config, &mut sink),
        Command::PeriodicEntropy => cmd_periodic(&f, config, &mut sink),
        Command::Recurrence => cmd_recurrence(&f, config, &mut sink),
        Command::MixingTime => cmd_mixing(&f, config, &mut sink),
        Command::Bounds => cmd_bounds(&f, config, &mut sink),
        Command::Shadowing => cmd_shadowing(&f, config, &mut sink),
        Command::Verify => cmd_verify(&f, config, &mut sink),
    })?;
    let exit = if passed { 0 } else { 1 };
    let manifest = json!({
        "command": command.name(),
        "config": config,
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "exit_code": exit,
        "outputs": sink.files,
        "wall_time_ms": start.elapsed().as_millis() as u64,
    });
    sink.json("manifest.json", &manifest)?;
    Ok(RunOutcome {
        exit_code: exit,
        report: sink.report,
        files: sink.files,
    })
}

/// Parses `args` (program name first), runs, prints, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome =
        RunConfig::resolve(cli.command, &cli.options).and_then(|cfg| run(cli.command, &cfg));
    match outcome {
        Ok(o) => {
            print!("{}", o.report);
            o.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn cells2(xs: &[f64], ys: &[f64]) -> Vec<(f64, f64)> {
    xs.iter()
        .flat_map(|&x| ys.iter().map(move |&y| (x, y)))
        .collect()
}

fn cmd_entropy(f: &MapSequence, cfg: &RunConfig, sink: &mut Sink) -> Result<bool> {
    cfg.require("eps", &cfg.epsilon)?;
    let estimates: Vec<_> = cfg
        .epsilon
        .par_iter()
        .map(|&eps| entropy_estimate(f, &cfg.bowen(eps)))
        .collect::<Result<_>>()?;
    let mut cells = Vec::new();
    for (eps, est) in cfg.epsilon.iter().zip(&estimates) {
        sink.write(&format!("entropy_eps{eps}.csv"), &est.series.to_csv())?;
        let summary = est.summary_json();
        sink.write(&format!("entropy_eps{eps}.json"), &format!("{summary}\n"))?;
        sink.line(&summary);
        cells.push(json!({ "epsilon": eps, "value_nats": est.value }));
    }
    let best = estimates
        .iter()
        .max_by(|a, b| a.value.total_cmp(&b.value))
        .expect("nonempty sweep");
    let record = json!({
        "value_nats": best.value,
        "value_bits": best.value_bits(),
        "best_epsilon": best.params.epsilon,
        "cells": cells,
    });
    sink.line(record.to_string());
    sink.json("entropy.json", &record)?;
    Ok(true)
}

fn cmd_pseudo(f: &MapSequence, cfg: &RunConfig, sink: &mut Sink) -> Result<bool> {
    cfg.require("eps", &cfg.epsilon)?;
    let cells = cells2(&cfg.epsilon, &cfg.alpha);
    let estimates: Vec<_> = cells
        .par_iter()
        .map(|&(eps, alpha)| pseudo_entropy(f, &cfg.bowen(eps), alpha))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (&(eps, alpha), est) in cells.iter().zip(&estimates) {
        let stem = format!("pseudo-entropy_eps{eps}_alpha{alpha}");
        sink.write(&format!("{stem}.csv"), &est.series.to_csv())?;
        let summary = est.summary_json();
        sink.write(&format!("{stem}.json"), &format!("{summary}\n"))?;
        sink.line(&summary);
        rows.push(json!({ "epsilon": eps, "alpha": alpha, "value_nats": est.value }));
    }
    let best = estimates.iter().map(|e| e.value).fold(0.0, f64::max);
    let record = json!({ "value_nats": best, "cells": rows });
    sink.line(record.to_string());
    sink.json("pseudo-entropy.json", &record)?;
    Ok(true)
}

fn cmd_periodic(f: &MapSequence, cfg: &RunConfig, sink: &mut Sink) -> Result<bool> {
    let grid = Grid::new(cfg.grid_size)?;
    let results: Vec<_> = cfg
        .alpha
        .par_iter()
        .map(|&alpha| periodic_pseudo_entropy(f, alpha, &grid, cfg.n_min, cfg.n_max))
        .collect::<Result<_>>()?;
    for (alpha, r) in cfg.alpha.iter().zip(&results) {
        let stem = format!("periodic-entropy_alpha{alpha}");
        sink.write(&format!("{stem}.csv"), &r.trace_fit.series.to_csv())?;
        let record = json!({
            "alpha": alpha,
            "grid_size": cfg.grid_size,
            "value_nats": r.value,
            "rho": r.spectral.rho,
            "lifted_rho": r.spectral.lifted_rho,
            "iterations": r.spectral.iterations,
            "trace_value_nats": r.trace_fit.value,
            "trace_gap": r.trace_gap(),
            "n_min": cfg.n_min,
            "n_max": cfg.n_max,
            "transitive": r.transitive,
            "warnings": r.warnings,
        });
        sink.line(record.to_string());
        sink.json(&format!("{stem}.json"), &record)?;
    }
    Ok(true)
}

fn cmd_recurrence(f: &MapSequence, cfg: &RunConfig, sink: &mut Sink) -> Result<bool> {
    let grid = Grid::new(cfg.grid_size)?;
    let mixing = match (cfg.epsilon.first(), cfg.delta.first()) {
        (Some(&e), Some(&d)) => Some((e, d)),
        _ => None,
    };
    let results: Vec<_> = cfg
        .alpha
        .par_iter()
        .map(|&alpha| -> Result<_> {
            Ok((
                recurrence_report(f, alpha, &grid, mixing)?,
                ChainReach::new(f, alpha, &grid)?.classes(),
            ))
        })
        .collect::<Result<_>>()?;
    for (alpha, (report, classes)) in cfg.alpha.iter().zip(&results) {
        let stem = format!("recurrence_alpha{alpha}");
        let mut csv = String::from("class,size,nodes\n");
        for (k, c) in classes.iter().enumerate() {
            writeln!(csv, "{k},{},\"{}\"", c.len(), encode_ranges(c)).unwrap();
        }
        sink.write(&format!("{stem}_classes.csv"), &csv)?;
        let line = report.to_json();
        sink.write(&format!("{stem}.json"), &format!("{line}\n"))?;
        sink.line(line);
    }
    Ok(true)
}

fn bound_for(f: &MapSequence, delta: f64, eps: f64) -> Option<f64> {
    mixing_time_lower_bound(lipschitz_constant(f), 1.0, delta, eps).ok()
}

fn cmd_mixing(f: &MapSequence, cfg: &RunConfig, sink: &mut Sink) -> Result<bool> {
    cfg.require("eps", &cfg.epsilon)?;
    cfg.require("delta", &cfg.delta)?;
    let grid = Grid::new(cfg.grid_size)?;
    let confirm = default_confirm_horizon(f);
    let cells = cells2(&cfg.epsilon, &cfg.delta);
    let results: Vec<_> = cells
        .par_iter()
        .map(|&(eps, delta)| chain_mixing_time(f, eps, delta, &grid, confirm))
        .collect::<Result<_>>()?;
    for (&(eps, delta), m) in cells.iter().zip(&results) {
        let record = json!({
            "epsilon": eps,
            "delta": delta,
            "grid_size": cfg.grid_size,
            "value": m.value,
            "per_point_max_witness": m.per_point_max_witness,
            "confirm_horizon": m.confirm_horizon,
            "lower_bound": bound_for(f, delta, eps),
        });
        sink.line(record.to_string());
        sink.json(&format!("mixing-time_eps{eps}_delta{delta}.json"), &record)?;
    }
    Ok(true)
}

#[derive(Serialize)]
struct BoundsRow {
    fixture: String,
    c: f64,
    delta: f64,
    epsilon: f64,
    m_measured: usize,
    m_bound: f64,
    ratio: f64,
}

fn cmd_bounds(f: &MapSequence, cfg: &RunConfig, sink: &mut Sink) -> Result<bool> {
    cfg.require("eps", &cfg.epsilon)?;
    cfg.require("delta", &cfg.delta)?;
    let grid = Grid::new(cfg.grid_size)?;
    let c = lipschitz_constant(f);
    let confirm = default_confirm_horizon(f);
    let cells: Vec<(f64, f64)> = cells2(&cfg.delta, &cfg.epsilon)
        .into_iter()
        .filter(|(d, e)| e <= d)
        .collect();
    if cells.is_empty() {
        return Err(Error::Config(
            "no (delta, eps) pair satisfies eps <= delta".into(),
        ));
    }
    let measured: Vec<_> = cells
        .par_iter()
        .map(|&(delta, eps)| -> Result<_> {
            let m = chain_mixing_time(f, eps, delta, &grid, confirm)?;
            Ok((m.value, mixing_time_lower_bound(c, 1.0, delta, eps)?))
        })
        .collect::<Result<_>>()?;
    let rows: Vec<BoundsRow> = cells
        .iter()
        .zip(&measured)
        .map(|(&(delta, epsilon), &(m, b))| BoundsRow {
            fixture: cfg.system.clone(),
            c,
            delta,
            epsilon,
            m_measured: m,
            m_bound: b,
            ratio: m as f64 / b,
        })
        .collect();
    let mut csv = String::from("fixture,c,delta,epsilon,m_measured,m_bound,ratio\n");
    sink.line(format!(
        "{:<20} {:>6} {:>6} {:>6} {:>10} {:>10} {:>8}",
        "fixture", "c", "δ", "ε", "m_measured", "m_bound", "ratio"
    ));
    for r in &rows {
        writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            r.fixture, r.c, r.delta, r.epsilon, r.m_measured, r.m_bound, r.ratio
        )
        .unwrap();
        sink.line(format!(
            "{:<20} {:>6} {:>6} {:>6} {:>10} {:>10.3} {:>8.3}",
            r.fixture, r.c, r.delta, r.epsilon, r.m_measured, r.m_bound, r.ratio
        ));
    }
    sink.write("bounds.csv", &csv)?;

    let eps_lb = cfg.epsilon[0];
    let lower = match entropy_lower_bound(f, &cfg.delta, eps_lb, &grid) {
        Ok(lb) => {
            json!({ "value": lb.value, "d_prime": lb.d_prime, "epsilon": lb.epsilon, "rows": lb.rows, "warnings": lb.warnings })
        }
        Err(e) if e.is_analysis() || matches!(e, Error::Config(_)) => {
            json!({ "unavailable": e.to_string() })
        }
        Err(e) => return Err(e),
    };
    let fix = match f.period() {
        Some(q) => {
            let ns: Vec<usize> = (cfg.n_min..=cfg.n_max).filter(|n| n % q == 0).collect();
            match fix_growth_entropy(f, &ns) {
                Ok(est) => {
                    json!({ "value": est.value, "n_min": est.params.n_min, "n_max": est.params.n_max })
                }
                Err(e) => json!({ "unavailable": e.to_string() }),
            }
        }
        None => json!({ "unavailable": "fixed-point growth needs a periodic sequence" }),
    };
    sink.line(format!("entropy lower bound: {lower}"));
    sink.line(format!("fixed-point growth: {fix}"));
    sink.json(
        "bounds.json",
        &json!({ "rows": rows, "entropy_lower_bound": lower, "fix_growth": fix }),
    )?;
    Ok(true)
}

struct ShadowTally {
    csv: String,
    traced: usize,
}

fn shadow_trials(
    f: &MapSequence,
    alpha: f64,
    eps: f64,
    grid: &Grid,
    trials: usize,
    length: usize,
    seed: u64,
) -> Result<ShadowTally> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut csv = String::from("trial,start_node,traced,witness,deviation\n");
    let mut traced = 0;
    for t in 0..trials {
        let pseudo = random_pseudo_orbit(f, alpha, grid, length, &mut rng)?;
        match shadowing_witness(f, &pseudo, eps)? {
            Some(w) => {
                traced += 1;
                let y = w.point.to_f64().unwrap_or(f64::NAN);
                writeln!(csv, "{t},{},true,{y:?},{:?}", pseudo.nodes[0], w.deviation).unwrap();
            }
            None => writeln!(csv, "{t},{},false,,", pseudo.nodes[0]).unwrap(),
        }
    }
    Ok(ShadowTally { csv, traced })
}

fn cmd_shadowing(f: &MapSequence, cfg: &RunConfig, sink: &mut Sink) -> Result<bool> {
    cfg.require("eps", &cfg.epsilon)?;
    let grid = Grid::new(cfg.grid_size)?;
    let cells = cells2(&cfg.alpha, &cfg.epsilon);
    let tallies: Vec<_> = cells
        .par_iter()
        .map(|&(alpha, eps)| shadow_trials(f, alpha, eps, &grid, cfg.trials, cfg.length, cfg.seed))
        .collect::<Result<_>>()?;
    for (&(alpha, eps), t) in cells.iter().zip(&tallies) {
        let stem = format!("shadowing_alpha{alpha}_eps{eps}");
        sink.write(&format!("{stem}.csv"), &t.csv)?;
        let record = json!({
            "alpha": alpha,
            "epsilon": eps,
            "grid_size": cfg.grid_size,
            "length": cfg.length,
            "trials": cfg.trials,
            "traced": t.traced,
            "rate": t.traced as f64 / cfg.trials as f64,
            "seed": cfg.seed,
        });
        sink.line(record.to_string());
        sink.json(&format!("{stem}.json"), &record)?;
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skip,
    Info,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub tolerance: Option<f64>,
    pub status: CheckStatus,
    pub note: String,
}

impl Check {
    fn close(name: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        let ok = (lhs - rhs).abs() <= tol;
        Check {
            name: name.into(),
            lhs: Some(lhs),
            rhs: Some(rhs),
            tolerance: Some(tol),
            status: if ok {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            note: format!("|diff| = {:.4}", (lhs - rhs).abs()),
        }
    }

    fn at_least(name: &str, lhs: f64, rhs: f64, slack: f64) -> Self {
        Check {
            name: name.into(),
            lhs: Some(lhs),
            rhs: Some(rhs),
            tolerance: Some(slack),
            status: if lhs >= rhs - slack {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            note: String::new(),
        }
    }

    fn skip(name: &str, note: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            lhs: None,
            rhs: None,
            tolerance: None,
            status: CheckStatus::Skip,
            note: note.into(),
        }
    }
}

/// Runs every cross-check applicable to `f`. Analysis errors that mean a check does not
/// apply (no chain mixing, no period) become skipped rows.
pub fn verify_checks(f: &MapSequence, cfg: &RunConfig) -> Result<Vec<Check>> {
    let grid = Grid::new(cfg.grid_size)?;
    let alpha = cfg.alpha[0];
    let eps = *cfg
        .epsilon
        .first()
        .ok_or_else(|| Error::Config("verify needs --eps".into()))?;
    let params = cfg.bowen(eps);
    let mut checks = Vec::new();

    let h = entropy_estimate(f, &params)?;
    let hp = pseudo_entropy(f, &params, alpha)?;
    checks.push(Check::close("h_p = h", hp.value, h.value, TOL_ENTROPY));

    if f.is_periodic() {
        let (a, b) = VERIFY_TRACE_WINDOW;
        let pe = periodic_pseudo_entropy(f, alpha, &grid, a, b)?;
        if pe.transitive {
            checks.push(Check::close("H_p = h", pe.value, h.value, TOL_ENTROPY));
        } else {
            checks.push(Check::skip("H_p = h", "not chain transitive"));
        }
        checks.push(Check::close(
            "H_p spectral = trace fit",
            pe.value,
            pe.trace_fit.value,
            TOL_TRACE,
        ));
    } else {
        checks.push(Check::skip("H_p = h", "finite sequence has no period"));
    }

    let c = lipschitz_constant(f);
    let confirm = default_confirm_horizon(f);
    for &delta in &VERIFY_DELTAS {
        for &me in VERIFY_MIXING_EPS.iter().filter(|&&e| e < delta) {
            let name = format!("mixing time >= bound (δ={delta}, ε={me})");
            match chain_mixing_time(f, me, delta, &grid, confirm) {
                Ok(m) => {
                    let b = mixing_time_lower_bound(c, 1.0, delta, me)?;
                    checks.push(Check::at_least(&name, m.value as f64, b, MIXING_SLACK));
                }
                Err(e) if e.is_analysis() => checks.push(Check::skip(&name, e.to_string())),
                Err(e) => return Err(e),
            }
        }
    }

    match entropy_lower_bound(f, &VERIFY_DELTAS, VERIFY_MIXING_EPS[0], &grid) {
        Ok(lb) => {
            let mut ck = Check::at_least(
                "entropy lower bound <= h",
                h.value + TOL_LOWER_BOUND,
                lb.value,
                0.0,
            );
            ck.note = format!("bound {:.4}, h {:.4}", lb.value, h.value);
            checks.push(ck);
        }
        Err(e) if e.is_analysis() => {
            checks.push(Check::skip("entropy lower bound <= h", e.to_string()))
        }
        Err(e) => return Err(e),
    }

    let cr = chain_recurrent_set(f, alpha, &grid)?;
    if cr.is_empty() {
        checks.push(Check::skip("h on CR = h", "empty chain-recurrent set"));
    } else {
        let h_cr = entropy_estimate_on(f, &params, &cr)?;
        checks.push(Check::close("h on CR = h", h_cr.value, h.value, TOL_CR));
    }

    let len = cfg.length;
    match f.check_window(1, len - 1) {
        Ok(()) => {
            let t = shadow_trials(f, alpha, eps, &grid, cfg.trials, len, cfg.seed)?;
            let rate = t.traced as f64 / cfg.trials as f64;
            checks.push(Check {
                name: "shadowing rate".into(),
                lhs: Some(rate),
                rhs: None,
                tolerance: None,
                status: CheckStatus::Info,
                note: format!(
                    "{}/{} pseudo-orbits of length {len} traced",
                    t.traced, cfg.trials
                ),
            });
        }
        Err(_) => checks.push(Check::skip(
            "shadowing rate",
            "pseudo-orbit length exceeds the horizon",
        )),
    }
    Ok(checks)
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.4}"))
}

fn cmd_verify(f: &MapSequence, cfg: &RunConfig, sink: &mut Sink) -> Result<bool> {
    let checks = verify_checks(f, cfg)?;
    let mut csv = String::from("check,lhs,rhs,tolerance,status,note\n");
    sink.line(format!(
        "{:<40} {:>9} {:>9} {:>7}  {:<6} {}",
        "check", "lhs", "rhs", "tol", "status", "note"
    ));
    for c in &checks {
        let status = match c.status {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Skip => "SKIP",
            CheckStatus::Info => "INFO",
        };
        sink.line(format!(
            "{:<40} {:>9} {:>9} {:>7}  {:<6} {}",
            c.name,
            fmt_opt(c.lhs),
            fmt_opt(c.rhs),
            fmt_opt(c.tolerance),
            status,
            c.note
        ));
        let opt = |x: Option<f64>| x.map_or_else(String::new, |v| format!("{v:?}"));
        writeln!(
            csv,
            "\"{}\",{},{},{},{status},\"{}\"",
            c.name,
            opt(c.lhs),
            opt(c.rhs),
            opt(c.tolerance),
            c.note
        )
        .unwrap();
    }
    let passed = checks.iter().all(|c| c.status != CheckStatus::Fail);
    sink.write("verify.csv", &csv)?;
    sink.json(
        "verify.json",
        &json!({ "system": cfg.system, "passed": passed, "checks": checks }),
    )?;
    sink.line(if passed {
        "all checks passed"
    } else {
        "verification FAILED"
    });
    Ok(passed)
}
