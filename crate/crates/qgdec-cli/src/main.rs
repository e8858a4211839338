//! `qgdec` — wormhole-decoherence rates, interferometer contrast, and
//! exclusion bounds from the command line.
//!
//! One concern per subcommand, composition through files:
//!
//! * `gamma` — localization rate γ_QG and wormhole momentum spread σ
//! * `trajectory` — branch-separation samples d(t) as CSV
//! * `kernel` — localization-kernel samples D(Δx) as CSV
//! * `contrast` — predicted fringe contrast for the configured sweep
//! * `bound` — invert a measured contrast into γ_max and exclusion ratios
//! * `evolve` — stepped coherence decay time series as CSV
//! * `scan` — sweep one parameter, emitting γ/exponent/contrast per value
//!
//! Exit codes: 0 success, 1 usage or config error, 2 numeric failure
//! (quadrature breakdown, positivity loss). All numbers are SI; CSV cells
//! are shortest-round-trip decimals with no unit suffixes.

mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qgdec_core::bounds::{exclusion_ratio, invert_bound, BoundStatus, MeasuredContrast};
use qgdec_core::evolution::{coherence_decay, coherence_time_series};
use qgdec_core::kernels::{gamma_qg, wormhole_sigma, LocalizationKernel};
use qgdec_core::units::{Dimension, Quantity};

use config::{ResolvedConfig, ScanAxis};
use output::{csv_table, fmt_digits, fmt_shortest};

/// Errors carrying the exit-code contract: usage/config failures exit 1,
/// numeric failures (quadrature, positivity) exit 2.
#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numeric(_) => 2,
        }
    }
}

impl From<qgdec_core::Error> for CliError {
    fn from(e: qgdec_core::Error) -> Self {
        match e {
            qgdec_core::Error::Numeric(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "qgdec",
    version,
    about = "Wormhole-decoherence rates, interferometer contrast, and exclusion bounds"
)]
struct Cli {
    /// TOML config file; sections [constants] [model] [trajectory] [recoils]
    /// [measurement] [output], flat keys only.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Named parameter preset (expanded before config-file keys apply).
    /// Available: kovachy2015.
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,

    /// Write CSV output to this file. Data subcommands print CSV to stdout
    /// when absent; scalar subcommands print a human table either way.
    #[arg(long, global = true, value_name = "PATH")]
    csv: Option<PathBuf>,

    /// Significant digits for human-readable numbers; 17 or more means
    /// shortest round-trip. CSV cells are always shortest round-trip.
    #[arg(long, global = true, value_name = "DIGITS")]
    precision: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the localization rate gamma_QG and momentum spread sigma.
    Gamma,
    /// Emit branch-separation samples d(t) as CSV (t_s,d_m).
    Trajectory {
        /// Number of samples across the flight time, endpoints included.
        #[arg(long, default_value_t = 1001)]
        points: usize,
    },
    /// Emit localization-kernel samples D(dx) as CSV (separation_m,rate_per_s).
    Kernel {
        /// Kernel family to sample.
        #[arg(long, value_enum, default_value_t = KernelKind::Quadratic)]
        kernel: KernelKind,
        /// Largest separation to sample, m (samples run linearly from 0).
        #[arg(long, value_name = "METERS")]
        max_separation_m: f64,
        /// Number of samples, endpoints included.
        #[arg(long, default_value_t = 101)]
        points: usize,
        /// Scattering event rate R in s^-1 (scattering kernel only).
        /// Default: 2*gamma_QG/sigma^2, which reproduces the quadratic
        /// kernel in the small-separation limit.
        #[arg(long, value_name = "HZ")]
        event_rate: Option<f64>,
        /// Wormhole momentum spread in m^-1 (scattering kernel only).
        /// Default: c*m0^2/(hbar*m_Pl) from the configured constants.
        #[arg(long, value_name = "PER_METER")]
        sigma_per_m: Option<f64>,
    },
    /// Predicted fringe contrast for the configured model and trajectory.
    Contrast,
    /// Invert a measured contrast into a bound on gamma and the largest
    /// compatible wormhole density fraction.
    Bound {
        /// Measured fringe contrast in (0, 1]. Default: [measurement] contrast.
        #[arg(long)]
        contrast: Option<f64>,
        /// Decoherence-free off-diagonal magnitude in (0, 0.5]. Default:
        /// [measurement] initial_coherence, else 0.5.
        #[arg(long)]
        initial_coherence: Option<f64>,
        /// Fraction of the contrast loss attributed to the kernel, in (0, 1]
        /// (1 is maximally conservative). Default: [measurement]
        /// attribution_fraction, else 1.0.
        #[arg(long)]
        attribution: Option<f64>,
    },
    /// Emit the stepped coherence decay as CSV (t_s,coherence,exponent_accumulated).
    Evolve {
        /// Number of midpoint-rule time steps.
        #[arg(long, default_value_t = 1000)]
        steps: usize,
    },
    /// Sweep one parameter and emit CSV (axis,gamma,exponent,contrast).
    Scan {
        /// One of: d_max_m, half_time_s, species_mass_amu, density_fraction.
        #[arg(long)]
        axis: String,
        /// Comma-separated axis values; rows come out in this order.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum KernelKind {
    Quadratic,
    Scattering,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp
                | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file_raw = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            let raw = config::parse_config(&text)?;
            if raw.is_empty() && cli.preset.is_none() {
                return Err(CliError::usage(format!(
                    "config {} is empty: no preset and no required keys; set \
                     `preset = \"kovachy2015\"` or add [model]/[trajectory] sections",
                    path.display()
                )));
            }
            raw
        }
        None => config::RawConfig::default(),
    };
    // Precedence: command-line preset flag over the file's `preset` key;
    // file fields then override the expanded preset field by field.
    let preset_name = cli.preset.clone().or_else(|| file_raw.preset.clone());
    let merged = match &preset_name {
        Some(name) => file_raw.merged_over(config::preset(name)?),
        None => file_raw,
    };
    let resolved = config::resolve(merged)?;

    let precision = match cli.precision.or(resolved.output.precision) {
        Some(0) => return Err(CliError::usage("--precision must be at least 1")),
        Some(p) => p,
        None => 17,
    };
    let csv_path = cli.csv.clone().or_else(|| resolved.output.csv.clone());
    let csv_path = csv_path.as_deref();

    match cli.command {
        Command::Gamma => run_gamma(&resolved, precision, csv_path),
        Command::Trajectory { points } => run_trajectory(&resolved, points, csv_path),
        Command::Kernel {
            kernel,
            max_separation_m,
            points,
            event_rate,
            sigma_per_m,
        } => run_kernel(
            &resolved,
            kernel,
            max_separation_m,
            points,
            event_rate,
            sigma_per_m,
            csv_path,
        ),
        Command::Contrast => run_contrast(&resolved, precision, csv_path),
        Command::Bound {
            contrast,
            initial_coherence,
            attribution,
        } => run_bound(
            &resolved,
            contrast,
            initial_coherence,
            attribution,
            precision,
            csv_path,
        ),
        Command::Evolve { steps } => run_evolve(&resolved, steps, csv_path),
        Command::Scan { axis, values } => run_scan(&resolved, &axis, &values, csv_path),
    }
}

/// Write `content` to `path`, or to stdout when no path is given.
fn emit_csv(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, content)
            .map_err(|e| CliError::usage(format!("cannot write csv {}: {e}", p.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Aligned `key  value` lines for scalar results.
fn print_human(rows: &[(&str, String)]) {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (key, value) in rows {
        println!("{key:<width$}  {value}");
    }
}

fn run_gamma(
    resolved: &ResolvedConfig,
    precision: usize,
    csv_path: Option<&Path>,
) -> Result<(), CliError> {
    let model = resolved.require_model()?;
    let gamma = gamma_qg(&model.params);
    let sigma = wormhole_sigma(&model.params.constants);
    print_human(&[
        ("gamma_qg [m^-2 s^-1]", fmt_digits(gamma.value(), precision)),
        ("sigma [m^-1]", fmt_digits(sigma.value(), precision)),
    ]);
    if csv_path.is_some() {
        let table = csv_table(
            &["gamma_qg", "sigma"],
            &[vec![fmt_shortest(gamma.value()), fmt_shortest(sigma.value())]],
        );
        emit_csv(csv_path, &table)?;
    }
    Ok(())
}

fn run_trajectory(
    resolved: &ResolvedConfig,
    points: usize,
    csv_path: Option<&Path>,
) -> Result<(), CliError> {
    if points < 2 {
        return Err(CliError::usage(format!(
            "--points must be at least 2, got {points}"
        )));
    }
    let trajectory = resolved.require_trajectory()?;
    let t0 = trajectory.start().value();
    let t1 = trajectory.end().value();
    let mut rows = Vec::with_capacity(points);
    for i in 0..points {
        // Land the last sample exactly on the domain edge.
        let t = if i + 1 == points {
            t1
        } else {
            t0 + i as f64 * (t1 - t0) / (points - 1) as f64
        };
        let d = trajectory.separation_at(Quantity::seconds(t))?;
        rows.push(vec![fmt_shortest(t), fmt_shortest(d.value())]);
    }
    emit_csv(csv_path, &csv_table(&["t_s", "d_m"], &rows))
}

#[allow(clippy::too_many_arguments)]
fn run_kernel(
    resolved: &ResolvedConfig,
    kind: KernelKind,
    max_separation_m: f64,
    points: usize,
    event_rate: Option<f64>,
    sigma_per_m: Option<f64>,
    csv_path: Option<&Path>,
) -> Result<(), CliError> {
    if points < 2 {
        return Err(CliError::usage(format!(
            "--points must be at least 2, got {points}"
        )));
    }
    if !max_separation_m.is_finite() || max_separation_m <= 0.0 {
        return Err(CliError::usage(format!(
            "--max-separation-m must be strictly positive, got {max_separation_m}"
        )));
    }
    let kernel = match kind {
        KernelKind::Quadratic => {
            let model = resolved.require_model()?;
            LocalizationKernel::quadratic(gamma_qg(&model.params), model.prefactor)?
        }
        KernelKind::Scattering => {
            let sigma = match sigma_per_m {
                Some(v) => Quantity::try_new(v, Dimension::WAVENUMBER)
                    .map_err(|e| CliError::usage(format!("--sigma-per-m: {e}")))?,
                None => wormhole_sigma(&resolved.constants),
            };
            let rate = match event_rate {
                Some(v) => Quantity::try_new(v, Dimension::RATE)
                    .map_err(|e| CliError::usage(format!("--event-rate: {e}")))?,
                None => {
                    let model = resolved.require_model().map_err(|_| {
                        CliError::usage(
                            "scattering kernel needs --event-rate or a [model] section \
                             (the default rate 2*gamma_QG/sigma^2 matches the quadratic \
                             kernel's small-separation limit)",
                        )
                    })?;
                    gamma_qg(&model.params) * 2.0 / (sigma * sigma)
                }
            };
            LocalizationKernel::scattering_overlap(rate, sigma)?
        }
    };
    let mut rows = Vec::with_capacity(points);
    for i in 0..points {
        let dx = if i + 1 == points {
            max_separation_m
        } else {
            i as f64 * max_separation_m / (points - 1) as f64
        };
        let rate = kernel.rate(Quantity::meters(dx))?;
        rows.push(vec![fmt_shortest(dx), fmt_shortest(rate.value())]);
    }
    emit_csv(csv_path, &csv_table(&["separation_m", "rate_per_s"], &rows))
}

fn run_contrast(
    resolved: &ResolvedConfig,
    precision: usize,
    csv_path: Option<&Path>,
) -> Result<(), CliError> {
    let model = resolved.require_model()?;
    let trajectory = resolved.require_trajectory()?;
    let gamma = gamma_qg(&model.params);
    let kernel = LocalizationKernel::quadratic(gamma, model.prefactor)?;
    let result = coherence_decay(
        &kernel,
        trajectory,
        resolved.measurement.initial_coherence,
    )?;
    let kappa = trajectory.geometric_factor()?;
    print_human(&[
        ("gamma_qg [m^-2 s^-1]", fmt_digits(gamma.value(), precision)),
        ("kappa", fmt_digits(kappa, precision)),
        ("exponent", fmt_digits(result.exponent, precision)),
        (
            "final_coherence",
            fmt_digits(result.final_coherence, precision),
        ),
        ("contrast", fmt_digits(result.contrast, precision)),
    ]);
    if csv_path.is_some() {
        let table = csv_table(
            &["gamma_qg", "kappa", "exponent", "final_coherence", "contrast"],
            &[vec![
                fmt_shortest(gamma.value()),
                fmt_shortest(kappa),
                fmt_shortest(result.exponent),
                fmt_shortest(result.final_coherence),
                fmt_shortest(result.contrast),
            ]],
        );
        emit_csv(csv_path, &table)?;
    }
    Ok(())
}

fn run_bound(
    resolved: &ResolvedConfig,
    contrast: Option<f64>,
    initial_coherence: Option<f64>,
    attribution: Option<f64>,
    precision: usize,
    csv_path: Option<&Path>,
) -> Result<(), CliError> {
    let model = resolved.require_model()?;
    let trajectory = resolved.require_trajectory()?;
    let value = contrast.or(resolved.measurement.contrast).ok_or_else(|| {
        CliError::usage(
            "missing contrast: pass --contrast or set [measurement] contrast \
             (the kovachy2015 preset sets 0.28)",
        )
    })?;
    let ic = initial_coherence.unwrap_or(resolved.measurement.initial_coherence);
    let attribution = attribution.unwrap_or(resolved.measurement.attribution_fraction);
    let measured = MeasuredContrast::new(value, ic, attribution)?;
    let bound = invert_bound(&measured, trajectory, model.prefactor)?;
    let result = exclusion_ratio(&bound, &model.params);
    let status = match result.status {
        BoundStatus::Bounded => "bounded",
        BoundStatus::NoObservedLoss => "no_observed_loss",
    };
    print_human(&[
        (
            "exponent_observed",
            fmt_digits(bound.exponent_observed, precision),
        ),
        ("kappa", fmt_digits(bound.kappa, precision)),
        (
            "gamma_max [m^-2 s^-1]",
            fmt_digits(bound.gamma_max.value(), precision),
        ),
        (
            "gamma_model [m^-2 s^-1]",
            fmt_digits(result.gamma_model.value(), precision),
        ),
        (
            "exclusion_ratio",
            fmt_digits(result.exclusion_ratio, precision),
        ),
        (
            "density_fraction_max",
            fmt_digits(result.density_fraction_max, precision),
        ),
        ("status", status.to_string()),
    ]);
    if csv_path.is_some() {
        let table = csv_table(
            &[
                "exponent_observed",
                "gamma_max",
                "gamma_model",
                "exclusion_ratio",
                "density_fraction_max",
                "status",
            ],
            &[vec![
                fmt_shortest(bound.exponent_observed),
                fmt_shortest(bound.gamma_max.value()),
                fmt_shortest(result.gamma_model.value()),
                // An infinite ratio prints as the literal cell `inf`; the
                // status column disambiguates it.
                fmt_shortest(result.exclusion_ratio),
                fmt_shortest(result.density_fraction_max),
                status.to_string(),
            ]],
        );
        emit_csv(csv_path, &table)?;
    }
    Ok(())
}

fn run_evolve(
    resolved: &ResolvedConfig,
    steps: usize,
    csv_path: Option<&Path>,
) -> Result<(), CliError> {
    let model = resolved.require_model()?;
    let trajectory = resolved.require_trajectory()?;
    let kernel = LocalizationKernel::quadratic(gamma_qg(&model.params), model.prefactor)?;
    let series = coherence_time_series(
        &kernel,
        trajectory,
        resolved.measurement.initial_coherence,
        steps,
    )?;
    let rows: Vec<Vec<String>> = series
        .iter()
        .map(|p| {
            vec![
                fmt_shortest(p.time_s),
                fmt_shortest(p.coherence),
                fmt_shortest(p.exponent),
            ]
        })
        .collect();
    emit_csv(
        csv_path,
        &csv_table(&["t_s", "coherence", "exponent_accumulated"], &rows),
    )
}

fn run_scan(
    resolved: &ResolvedConfig,
    axis: &str,
    values: &[f64],
    csv_path: Option<&Path>,
) -> Result<(), CliError> {
    use rayon::prelude::*;

    let axis = ScanAxis::parse(axis)?;
    // Points are independent, so they may run in parallel; collecting an
    // indexed parallel iterator preserves input order, and each row's
    // arithmetic is identical regardless of scheduling, so output stays
    // byte-deterministic.
    let rows = values
        .par_iter()
        .map(|&value| -> Result<Vec<String>, CliError> {
            let point = resolved.with_axis_value(axis, value)?;
            let model = point.require_model()?;
            let trajectory = point.require_trajectory()?;
            let gamma = gamma_qg(&model.params);
            let kernel = LocalizationKernel::quadratic(gamma, model.prefactor)?;
            let result = coherence_decay(
                &kernel,
                trajectory,
                point.measurement.initial_coherence,
            )?;
            Ok(vec![
                fmt_shortest(value),
                fmt_shortest(gamma.value()),
                fmt_shortest(result.exponent),
                fmt_shortest(result.contrast),
            ])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    emit_csv(
        csv_path,
        &csv_table(&[axis.name(), "gamma", "exponent", "contrast"], &rows),
    )
}
