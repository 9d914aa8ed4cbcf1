//! Command-line front end: scenario sweeps, an inversion self-test and the
//! inter-node distance table.

pub mod config;
pub mod sweep;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use crate::geometry::{distance_cdf, distance_pdf, DiskRegion};
use crate::inversion::{euler_params_for_digits, invert_cdf, TransformHandle};

pub use config::{load_config, ConfigError, ScenarioConfig};
pub use sweep::{compute_sweep, run_sweep, write_csv, Method, SweepOptions, SweepRow};

#[derive(Debug, Parser)]
#[command(
    name = "v2x-chain",
    version,
    about = "Success probability and delay of a pedestrian/vehicle/base-station/cloud chain"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep the SINR threshold over a scenario and write CSV.
    Sweep(SweepArgs),
    /// Invert transforms with known CDFs and report the worst error.
    InvertSelftest {
        #[arg(long, default_value_t = 8)]
        digits: u32,
    },
    /// Tabulate the inter-node distance density and CDF of a disk.
    Pdf {
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
    },
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Preset name (A, B, C) or path to a TOML scenario file.
    #[arg(long)]
    pub scenario: String,
    /// Comma-separated subset of analytic, mc-z, mc-spatial.
    #[arg(long, value_delimiter = ',', default_value = "analytic")]
    pub methods: Vec<Method>,
    /// Smallest threshold (linear, or dB with --db).
    #[arg(long, allow_hyphen_values = true)]
    pub theta_min: Option<f64>,
    /// Largest threshold (linear, or dB with --db).
    #[arg(long, allow_hyphen_values = true)]
    pub theta_max: Option<f64>,
    /// Number of log-spaced thresholds.
    #[arg(long)]
    pub points: Option<usize>,
    /// Read --theta-min/--theta-max in dB.
    #[arg(long)]
    pub db: bool,
    /// Inversion accuracy target; overrides the scenario value.
    #[arg(long)]
    pub digits: Option<u32>,
    /// Monte Carlo trials per tier.
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Usage or I/O failure: exit status 2. Row-level failures give status 1.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sweep(#[from] sweep::SweepError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn run(cli: Cli) -> ExitCode {
    let result = match cli.command {
        Command::Sweep(args) => sweep_command(&args),
        Command::InvertSelftest { digits } => selftest_command(digits),
        Command::Pdf { radius, points } => pdf_command(radius, points),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Applies the threshold flags to the scenario grid. Any of the three flags
/// replaces the grid; unset ones fall back to 0.01, 100 and 20 points
/// (-20 dB and 20 dB with `--db`).
pub fn apply_grid_flags(cfg: &mut ScenarioConfig, args: &SweepArgs) -> Result<(), CliError> {
    if let Some(d) = args.digits {
        cfg.digits = d;
    }
    if args.theta_min.is_none() && args.theta_max.is_none() && args.points.is_none() {
        if args.db {
            return Err(CliError::Usage(
                "--db needs --theta-min or --theta-max".into(),
            ));
        }
        return Ok(());
    }
    let (lo, hi) = if args.db {
        (
            config::db_to_linear(args.theta_min.unwrap_or(-20.0)),
            config::db_to_linear(args.theta_max.unwrap_or(20.0)),
        )
    } else {
        (
            args.theta_min.unwrap_or(config::DEFAULT_THETA_MIN),
            args.theta_max.unwrap_or(config::DEFAULT_THETA_MAX),
        )
    };
    let points = args.points.unwrap_or(config::DEFAULT_THETA_POINTS);
    if points > 1 && lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
        return Err(CliError::Usage(format!(
            "theta range must be increasing, got {lo:e}..{hi:e}"
        )));
    }
    cfg.theta_grid = config::log_grid(lo, hi, points);
    Ok(())
}

fn sweep_command(args: &SweepArgs) -> Result<u8, CliError> {
    let mut cfg = load_config(&args.scenario)?;
    apply_grid_flags(&mut cfg, args)?;
    cfg.validate()?;
    let opts = SweepOptions {
        trials: args.trials,
        seed: args.seed,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} workers: {e}", args.jobs)))?;
    let rows = pool.install(|| compute_sweep(&cfg, &args.methods, &opts))?;
    match &args.out {
        Some(path) => write_csv(&rows, BufWriter::new(File::create(path)?))?,
        None => write_csv(&rows, io::stdout().lock())?,
    }
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        eprintln!("{failed} of {} rows failed", rows.len());
        return Ok(1);
    }
    Ok(0)
}

/// One self-test case: a transform, its exact CDF and where to compare.
pub struct SelftestCase {
    pub name: &'static str,
    pub transform: fn(Complex64) -> Complex64,
    pub cdf: fn(f64) -> f64,
    pub points: &'static [f64],
}

pub fn selftest_corpus() -> Vec<SelftestCase> {
    const POINTS: &[f64] = &[0.1, 0.5, 1.0, 2.0, 5.0];
    vec![
        SelftestCase {
            name: "exponential(1)",
            transform: |s| 1.0 / (1.0 + s),
            cdf: |t| 1.0 - (-t).exp(),
            points: POINTS,
        },
        SelftestCase {
            name: "erlang(2, 1)",
            transform: |s| (1.0 + s).powi(-2),
            cdf: |t| 1.0 - (1.0 + t) * (-t).exp(),
            points: POINTS,
        },
        SelftestCase {
            name: "point mass at 0",
            transform: |_| Complex64::new(1.0, 0.0),
            cdf: |_| 1.0,
            points: POINTS,
        },
        SelftestCase {
            name: "hyperexponential(0.3 x Exp(0.5), 0.7 x Exp(3))",
            transform: |s| 0.3 * 0.5 / (0.5 + s) + 0.7 * 3.0 / (3.0 + s),
            cdf: |t| 1.0 - 0.3 * (-0.5 * t).exp() - 0.7 * (-3.0 * t).exp(),
            points: POINTS,
        },
    ]
}

/// Largest absolute inversion error over the corpus, per case.
pub fn run_selftest(digits: u32) -> Result<Vec<(&'static str, f64)>, CliError> {
    let params = euler_params_for_digits(digits).map_err(|e| CliError::Usage(e.to_string()))?;
    selftest_corpus()
        .into_iter()
        .map(|case| {
            let f = case.transform;
            let handle = TransformHandle::closed_form(case.name, f);
            let mut worst = 0.0f64;
            for &t in case.points {
                let inv =
                    invert_cdf(&handle, t, params).map_err(|e| CliError::Usage(e.to_string()))?;
                worst = worst.max((inv.raw - (case.cdf)(t)).abs());
            }
            Ok((case.name, worst))
        })
        .collect()
}

fn selftest_command(digits: u32) -> Result<u8, CliError> {
    let results = run_selftest(digits)?;
    let tolerance = 10f64.powi(-(digits as i32) + 2);
    let mut out = io::stdout().lock();
    for (name, err) in &results {
        writeln!(out, "{name:<50} max error {err:.3e}")?;
    }
    let max = results.iter().map(|r| r.1).fold(0.0, f64::max);
    writeln!(out, "max error {max:.3e} (tolerance {tolerance:.0e})")?;
    Ok(u8::from(max > tolerance))
}

/// `points` evenly spaced distances on `[0, 2R]` with density and CDF.
pub fn pdf_table(radius: f64, points: usize) -> Result<Vec<[f64; 3]>, CliError> {
    let region = DiskRegion::new(radius).map_err(|e| CliError::Usage(e.to_string()))?;
    if points < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    let step = region.diameter() / (points - 1) as f64;
    (0..points)
        .map(|i| {
            let x = if i == points - 1 {
                region.diameter()
            } else {
                step * i as f64
            };
            let pdf = distance_pdf(x, &region).map_err(|e| CliError::Usage(e.to_string()))?;
            let cdf = distance_cdf(x, &region).map_err(|e| CliError::Usage(e.to_string()))?;
            Ok([x, pdf, cdf])
        })
        .collect()
}

fn pdf_command(radius: f64, points: usize) -> Result<u8, CliError> {
    let table = pdf_table(radius, points)?;
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    let csv_err = |e: csv::Error| CliError::Io(e.into());
    w.write_record(["distance", "pdf", "cdf"])
        .map_err(csv_err)?;
    for row in table {
        w.write_record(row.map(|v| format!("{v:e}")))
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(0)
}
