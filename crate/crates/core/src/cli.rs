//! Command-line front end: `kernel`, `transient`, `scan`, `spectrum` and
//! `validate`.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::coherence::{default_delta_range, delta_grid, require_fwhm, scan_metric_with, simulate_transient_with};
use crate::config::ConfigFile;
use crate::density::independent_rate;
use crate::error::{Error, Result};
use crate::kernel::build_kernel_table_with;
use crate::output::{emit_csv, fmt_num, sidecar_path, write_json, Metadata, VERSION};
use crate::params::{QGrid, SampleParams, DEFAULT_DQ, DEFAULT_Q_MAX};
use crate::quadrature::AdaptiveOptions;
use crate::spectrum::{spectrum_window, EmissionConfig, Orientation, DEFAULT_LINEWIDTH_RATIO};
use crate::validate::{run_validation, ValidationConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;
pub const EXIT_IO: i32 = 3;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidParameter { .. } | Error::Config { .. } => EXIT_BAD_INPUT,
        Error::Io { .. } => EXIT_IO,
        Error::QuadratureBudget { .. } | Error::NonFinite { .. } | Error::HalfMaxNotBracketed { .. } => {
            EXIT_FAILURE
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "relsr", version, about = "Relativistic two-particle superradiance simulations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the coherence kernel C(q) and |C|^2.
    Kernel(PipelineArgs),
    /// Density-operator diagonals and the emission rate R(q).
    Transient(PipelineArgs),
    /// Velocity coherence metric G over a delta_v grid, with its FWHM.
    Scan(ScanArgs),
    /// Doppler-shifted single-particle emission line.
    Spectrum(SpectrumArgs),
    /// Run every numerical invariant and report pass/fail as JSON.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// `key = value` file; flags take precedence over its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output path (CSV, or JSON for `validate`). Defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Absolute tolerance of the kernel quadrature.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Time horizon in q = Γ'₀t/(2γ).
    #[arg(long)]
    pub q_max: Option<f64>,
    /// Step in q.
    #[arg(long)]
    pub dq: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Velocity separation in units of c Γ'₀/ω'₀.
    #[arg(long, allow_negative_numbers = true)]
    pub delta_v: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub delta_v_min: Option<f64>,
    #[arg(long)]
    pub delta_v_max: Option<f64>,
    #[arg(long)]
    pub delta_v_step: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Polar angle from the velocity, radians.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Azimuth, radians (perpendicular dipoles only).
    #[arg(long)]
    pub phi: Option<f64>,
    /// `parallel` or `perpendicular` (dipole relative to velocity).
    #[arg(long)]
    pub orientation: Option<String>,
    /// Γ'₀/ω'₀.
    #[arg(long)]
    pub linewidth_ratio: Option<f64>,
    /// Half-span of the frequency window in line half-widths.
    #[arg(long)]
    pub window: Option<f64>,
    /// Number of frequency samples.
    #[arg(long)]
    pub points: Option<usize>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

const COMMON_KEYS: [&str; 3] = ["out", "workers", "tol"];

fn load_config(path: Option<&Path>, keys: &[&str]) -> Result<ConfigFile> {
    let Some(path) = path else {
        return Ok(ConfigFile::default());
    };
    let cfg = ConfigFile::load(path)?;
    let allowed: Vec<&str> = keys.iter().chain(COMMON_KEYS.iter()).copied().collect();
    cfg.check_keys(&allowed)?;
    Ok(cfg)
}

struct Resolved {
    out: Option<PathBuf>,
    workers: usize,
    opts: AdaptiveOptions,
}

fn resolve_common(file: &ConfigFile, common: &CommonArgs, default_workers: usize) -> Result<Resolved> {
    let tol = file.resolve("tol", common.tol, AdaptiveOptions::default().tol)?;
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::invalid("tol", format!("{tol} must be positive")));
    }
    Ok(Resolved {
        out: file.resolve_opt("out", common.out.clone())?,
        workers: file.resolve("workers", common.workers, default_workers)?,
        opts: AdaptiveOptions {
            tol,
            ..AdaptiveOptions::default()
        },
    })
}

fn resolve_grid(file: &ConfigFile, grid: &GridArgs) -> Result<QGrid> {
    QGrid::new(
        file.resolve("q-max", grid.q_max, DEFAULT_Q_MAX)?,
        file.resolve("dq", grid.dq, DEFAULT_DQ)?,
    )
}

fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid("workers", e.to_string()))?;
    Ok(pool.install(f))
}

#[derive(Debug, Serialize)]
struct RunSummary {
    command: &'static str,
    version: &'static str,
    inputs: serde_json::Value,
    derived: serde_json::Value,
    grid: serde_json::Value,
    wall_clock_seconds: f64,
}

fn emit_summary(out: Option<&Path>, summary: &RunSummary) -> Result<()> {
    match out {
        Some(p) => write_json(&sidecar_path(p), summary),
        None => {
            let text = serde_json::to_string_pretty(summary).expect("summary serializes");
            eprintln!("{text}");
            Ok(())
        }
    }
}

fn grid_meta(meta: Metadata, grid: &QGrid) -> Metadata {
    meta.field("q_max", grid.q_max()).field("dq", grid.dq()).field("n", grid.len())
}

fn grid_json(grid: &QGrid) -> serde_json::Value {
    json!({ "q_max": grid.q_max(), "dq": grid.dq(), "n": grid.len(), "q_last": grid.q_last() })
}

const PIPELINE_KEYS: [&str; 4] = ["beta", "delta-v", "q-max", "dq"];

fn resolve_pipeline(args: &PipelineArgs) -> Result<(SampleParams, QGrid, Resolved)> {
    let file = load_config(args.common.config.as_deref(), &PIPELINE_KEYS)?;
    let params = SampleParams::new(
        file.resolve("beta", args.beta, 0.0)?,
        file.resolve("delta-v", args.delta_v, 0.0)?,
    )?;
    let grid = resolve_grid(&file, &args.grid)?;
    let common = resolve_common(&file, &args.common, 1)?;
    Ok((params, grid, common))
}

pub fn cmd_kernel(args: &PipelineArgs) -> Result<()> {
    let start = Instant::now();
    let (params, grid, common) = resolve_pipeline(args)?;
    let table = with_workers(common.workers, || build_kernel_table_with(&params, &grid, common.opts))??;
    let re: Vec<f64> = table.values.iter().map(|c| c.re).collect();
    let im: Vec<f64> = table.values.iter().map(|c| c.im).collect();
    let sq: Vec<f64> = table.values.iter().map(|c| c.norm_sqr()).collect();
    let q: Vec<f64> = grid.points().collect();
    let meta = grid_meta(
        Metadata::new("kernel")
            .field("beta", params.beta())
            .field("delta_v", params.delta_v()),
        &grid,
    )
    .field("tol", common.opts.tol);
    emit_csv(
        common.out.as_deref(),
        &meta,
        &["q", "re_c", "im_c", "abs_c_sq"],
        &[&q, &re, &im, &sq],
    )?;
    emit_summary(
        common.out.as_deref(),
        &RunSummary {
            command: "kernel",
            version: VERSION,
            inputs: json!({ "beta": params.beta(), "delta_v": params.delta_v(), "tol": common.opts.tol }),
            derived: json!({ "gamma": params.gamma() }),
            grid: grid_json(&grid),
            wall_clock_seconds: start.elapsed().as_secs_f64(),
        },
    )
}

pub fn cmd_transient(args: &PipelineArgs) -> Result<()> {
    let start = Instant::now();
    let (params, grid, common) = resolve_pipeline(args)?;
    let dens = with_workers(common.workers, || simulate_transient_with(&params, &grid, common.opts))??;
    let q: Vec<f64> = grid.points().collect();
    let indep: Vec<f64> = q.iter().map(|&q| independent_rate(q)).collect();
    let meta = grid_meta(
        Metadata::new("transient")
            .field("beta", params.beta())
            .field("delta_v", params.delta_v()),
        &grid,
    )
    .field("tol", common.opts.tol);
    emit_csv(
        common.out.as_deref(),
        &meta,
        &["q", "rho_ee", "rho_1", "rho_gg", "trace", "rate", "rate_independent"],
        &[&q, &dens.rho_ee, &dens.rho_1, &dens.rho_gg, &dens.trace, &dens.rate, &indep],
    )?;
    emit_summary(
        common.out.as_deref(),
        &RunSummary {
            command: "transient",
            version: VERSION,
            inputs: json!({ "beta": params.beta(), "delta_v": params.delta_v(), "tol": common.opts.tol }),
            derived: json!({
                "gamma": params.gamma(),
                "squared_departure": crate::coherence::squared_departure(&dens),
            }),
            grid: grid_json(&grid),
            wall_clock_seconds: start.elapsed().as_secs_f64(),
        },
    )
}

const SCAN_KEYS: [&str; 6] = ["beta", "delta-v-min", "delta-v-max", "delta-v-step", "q-max", "dq"];

pub fn cmd_scan(args: &ScanArgs) -> Result<()> {
    let start = Instant::now();
    let file = load_config(args.common.config.as_deref(), &SCAN_KEYS)?;
    let beta = file.resolve("beta", args.beta, 0.0)?;
    let params = SampleParams::new(beta, 0.0)?;
    let (default_max, default_step) = default_delta_range(beta);
    let d_min = file.resolve("delta-v-min", args.delta_v_min, 0.0)?;
    let d_max = file.resolve("delta-v-max", args.delta_v_max, default_max)?;
    let d_step = file.resolve("delta-v-step", args.delta_v_step, default_step)?;
    if !(d_min >= 0.0) || !d_min.is_finite() {
        return Err(Error::invalid("delta_v_min", format!("{d_min} must be non-negative")));
    }
    let deltas: Vec<f64> = delta_grid(d_max - d_min, d_step)?
        .into_iter()
        .map(|d| d_min + d)
        .collect();
    let grid = resolve_grid(&file, &args.grid)?;
    let common = resolve_common(&file, &args.common, 0)?;

    let scan = with_workers(common.workers, || scan_metric_with(beta, &deltas, &grid, common.opts))??;

    let meta = grid_meta(
        Metadata::new("scan")
            .field("beta", beta)
            .field("delta_v_min", d_min)
            .field("delta_v_max", d_max)
            .field("delta_v_step", d_step),
        &grid,
    )
    .field("tol", common.opts.tol);
    emit_csv(common.out.as_deref(), &meta, &["delta_v", "g"], &[&scan.delta_grid, &scan.g_values])?;
    emit_summary(
        common.out.as_deref(),
        &RunSummary {
            command: "scan",
            version: VERSION,
            inputs: json!({
                "beta": beta,
                "delta_v_min": d_min,
                "delta_v_max": d_max,
                "delta_v_step": d_step,
                "tol": common.opts.tol,
            }),
            derived: json!({
                "gamma": params.gamma(),
                "gamma_squared": params.gamma() * params.gamma(),
                "normalization_a": scan.normalization_a,
                "fwhm": scan.fwhm,
                "half_max_interpolation": "linear",
            }),
            grid: json!({
                "q": grid_json(&grid),
                "delta_v_points": scan.delta_grid.len(),
                "delta_v_last": scan.delta_grid.last(),
            }),
            wall_clock_seconds: start.elapsed().as_secs_f64(),
        },
    )?;
    require_fwhm(scan).map(|_| ())
}

const SPECTRUM_KEYS: [&str; 7] = ["beta", "theta", "phi", "orientation", "linewidth-ratio", "window", "points"];

pub fn cmd_spectrum(args: &SpectrumArgs) -> Result<()> {
    let start = Instant::now();
    let file = load_config(args.common.config.as_deref(), &SPECTRUM_KEYS)?;
    let orientation: Orientation = file
        .resolve("orientation", args.orientation.clone(), "perpendicular".to_string())?
        .parse()?;
    let cfg = EmissionConfig::new(
        file.resolve("beta", args.beta, 0.0)?,
        orientation,
        file.resolve("theta", args.theta, PI / 2.0)?,
        file.resolve("phi", args.phi, 0.0)?,
        file.resolve("linewidth-ratio", args.linewidth_ratio, DEFAULT_LINEWIDTH_RATIO)?,
    )?;
    let window = file.resolve("window", args.window, 20.0)?;
    let points = file.resolve("points", args.points, 2001)?;
    let common = resolve_common(&file, &args.common, 1)?;
    let samples = spectrum_window(&cfg, window, points)?;
    let w: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let intensity: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let meta = Metadata::new("spectrum")
        .field("beta", cfg.beta)
        .field("orientation", cfg.orientation)
        .field("theta", cfg.theta)
        .field("phi", cfg.phi)
        .field("linewidth_ratio", cfg.linewidth_ratio)
        .field("window", window)
        .field("points", points)
        .field("peak", fmt_num(cfg.doppler_peak()));
    emit_csv(common.out.as_deref(), &meta, &["omega_over_omega0", "intensity"], &[&w, &intensity])?;
    emit_summary(
        common.out.as_deref(),
        &RunSummary {
            command: "spectrum",
            version: VERSION,
            inputs: serde_json::to_value(cfg).expect("config serializes"),
            derived: json!({
                "gamma": cfg.gamma(),
                "doppler_peak": cfg.doppler_peak(),
                "half_width": cfg.half_width(),
            }),
            grid: json!({ "window_half_widths": window, "points": points }),
            wall_clock_seconds: start.elapsed().as_secs_f64(),
        },
    )
}

/// Returns whether every check passed.
pub fn cmd_validate(args: &ValidateArgs) -> Result<bool> {
    let file = load_config(args.common.config.as_deref(), &["q-max", "dq"])?;
    let grid = resolve_grid(&file, &args.grid)?;
    let common = resolve_common(&file, &args.common, 0)?;
    let cfg = ValidationConfig {
        grid,
        opts: common.opts,
    };
    let report = with_workers(common.workers, || run_validation(&cfg))??;
    for c in &report.checks {
        eprintln!(
            "{} {:<64} measured={:<12.5e} {} {:.3e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.relation,
            c.tolerance
        );
    }
    match common.out.as_deref() {
        Some(p) => write_json(p, &report)?,
        None => println!("{}", serde_json::to_string_pretty(&report).expect("report serializes")),
    }
    Ok(report.passed)
}

/// Dispatches a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Kernel(a) => cmd_kernel(a).map(|_| true),
        Command::Transient(a) => cmd_transient(a).map(|_| true),
        Command::Scan(a) => cmd_scan(a).map(|_| true),
        Command::Spectrum(a) => cmd_spectrum(a).map(|_| true),
        Command::Validate(a) => cmd_validate(a),
    };
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
