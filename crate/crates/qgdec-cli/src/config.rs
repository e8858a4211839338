//! Experiment configuration: TOML ingestion, the `kovachy2015` preset,
//! field-level merge semantics, and validation into core types.
//!
//! The wire format is a flat TOML document — scalar keys inside one level of
//! sections, no nested tables:
//!
//! ```toml
//! preset = "kovachy2015"       # optional; expands before file keys apply
//!
//! [constants]                   # CODATA-2018 defaults, all overridable
//! c_m_per_s = 2.99792458e8
//! hbar_j_s = 1.054571817e-34
//! planck_mass_kg = 2.176434e-8
//! nucleon_mass_kg = 1.67262192369e-27
//!
//! [model]
//! species_mass_amu = 86.909
//! density_fraction = 1.0        # default 1
//! prefactor = 1.0               # rate convention, 1 or 0.5; default 1
//!
//! [trajectory]
//! shape = "paper"               # "paper" | "triangular" | "constant" | "sampled"
//! d_max_m = 0.54
//! half_time_s = 1.04
//! # samples_csv = "ramp.csv"    # sampled shape only: header `t_s,d_m`
//!
//! [recoils]                     # optional; derives d_max, overriding d_max_m
//! n = 90
//! wavelength_nm = 780.24
//! drift_time_s = 1.04
//!
//! [measurement]
//! contrast = 0.28
//! initial_coherence = 0.5       # default
//! attribution_fraction = 1.0    # default
//!
//! [output]
//! csv = "out.csv"
//! precision = 17
//! ```
//!
//! Precedence is field-level: preset values fill first, file keys override
//! them one by one, command-line flags override both. Unknown keys are hard
//! errors — there is no silent typo tolerance.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use qgdec_core::kernels::EllisParameters;
use qgdec_core::trajectory::{max_separation_from_recoils, RecoilKinematics, Trajectory};
use qgdec_core::units::{Dimension, PhysicalConstants, Quantity};

use crate::CliError;

/// One TOML document (or preset), everything optional. This is the merge
/// currency: two `RawConfig`s combine field by field.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub preset: Option<String>,
    pub constants: Option<RawConstants>,
    pub model: Option<RawModel>,
    pub trajectory: Option<RawTrajectory>,
    pub recoils: Option<RawRecoils>,
    pub measurement: Option<RawMeasurement>,
    pub output: Option<RawOutput>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConstants {
    pub c_m_per_s: Option<f64>,
    pub hbar_j_s: Option<f64>,
    pub planck_mass_kg: Option<f64>,
    pub nucleon_mass_kg: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawModel {
    pub species_mass_amu: Option<f64>,
    pub density_fraction: Option<f64>,
    pub prefactor: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTrajectory {
    pub shape: Option<String>,
    pub d_max_m: Option<f64>,
    pub half_time_s: Option<f64>,
    pub samples_csv: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRecoils {
    pub n: Option<u32>,
    pub wavelength_nm: Option<f64>,
    pub drift_time_s: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMeasurement {
    pub contrast: Option<f64>,
    pub initial_coherence: Option<f64>,
    pub attribution_fraction: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOutput {
    pub csv: Option<String>,
    pub precision: Option<usize>,
}

impl RawConfig {
    /// True when the document sets nothing at all (used to reject an empty
    /// config file outright instead of failing key by key later).
    pub fn is_empty(&self) -> bool {
        self.preset.is_none()
            && self.constants.is_none()
            && self.model.is_none()
            && self.trajectory.is_none()
            && self.recoils.is_none()
            && self.measurement.is_none()
            && self.output.is_none()
    }

    /// Field-level merge: every key set in `self` wins, everything else
    /// falls through to `base`.
    pub fn merged_over(self, base: RawConfig) -> RawConfig {
        fn pick<T>(over: Option<T>, base: Option<T>) -> Option<T> {
            over.or(base)
        }
        RawConfig {
            preset: pick(self.preset, base.preset),
            constants: match (self.constants, base.constants) {
                (Some(o), Some(b)) => Some(RawConstants {
                    c_m_per_s: pick(o.c_m_per_s, b.c_m_per_s),
                    hbar_j_s: pick(o.hbar_j_s, b.hbar_j_s),
                    planck_mass_kg: pick(o.planck_mass_kg, b.planck_mass_kg),
                    nucleon_mass_kg: pick(o.nucleon_mass_kg, b.nucleon_mass_kg),
                }),
                (o, b) => o.or(b),
            },
            model: match (self.model, base.model) {
                (Some(o), Some(b)) => Some(RawModel {
                    species_mass_amu: pick(o.species_mass_amu, b.species_mass_amu),
                    density_fraction: pick(o.density_fraction, b.density_fraction),
                    prefactor: pick(o.prefactor, b.prefactor),
                }),
                (o, b) => o.or(b),
            },
            trajectory: match (self.trajectory, base.trajectory) {
                (Some(o), Some(b)) => Some(RawTrajectory {
                    shape: pick(o.shape, b.shape),
                    d_max_m: pick(o.d_max_m, b.d_max_m),
                    half_time_s: pick(o.half_time_s, b.half_time_s),
                    samples_csv: pick(o.samples_csv, b.samples_csv),
                }),
                (o, b) => o.or(b),
            },
            recoils: match (self.recoils, base.recoils) {
                (Some(o), Some(b)) => Some(RawRecoils {
                    n: pick(o.n, b.n),
                    wavelength_nm: pick(o.wavelength_nm, b.wavelength_nm),
                    drift_time_s: pick(o.drift_time_s, b.drift_time_s),
                }),
                (o, b) => o.or(b),
            },
            measurement: match (self.measurement, base.measurement) {
                (Some(o), Some(b)) => Some(RawMeasurement {
                    contrast: pick(o.contrast, b.contrast),
                    initial_coherence: pick(o.initial_coherence, b.initial_coherence),
                    attribution_fraction: pick(
                        o.attribution_fraction,
                        b.attribution_fraction,
                    ),
                }),
                (o, b) => o.or(b),
            },
            output: match (self.output, base.output) {
                (Some(o), Some(b)) => Some(RawOutput {
                    csv: pick(o.csv, b.csv),
                    precision: pick(o.precision, b.precision),
                }),
                (o, b) => o.or(b),
            },
        }
    }
}

/// Parse one TOML document. Syntax errors and unknown keys surface with the
/// line/column the toml crate reports.
pub fn parse_config(text: &str) -> Result<RawConfig, CliError> {
    toml::from_str::<RawConfig>(text)
        .map_err(|e| CliError::usage(format!("config error: {e}")))
}

/// Expand a named preset into a `RawConfig`.
///
/// `kovachy2015` is the 90ħk Stanford fountain point [Kovachy et al.,
/// Nature 528, 530 (2015)]: a single 87-Rb atom (86.909 amu) delocalized
/// over d_max = 0.54 m for a half-time of 1.04 s, fringe contrast 28%.
pub fn preset(name: &str) -> Result<RawConfig, CliError> {
    match name {
        "kovachy2015" => Ok(RawConfig {
            model: Some(RawModel {
                species_mass_amu: Some(86.909),
                ..RawModel::default()
            }),
            trajectory: Some(RawTrajectory {
                shape: Some("paper".into()),
                d_max_m: Some(0.54),
                half_time_s: Some(1.04),
                samples_csv: None,
            }),
            measurement: Some(RawMeasurement {
                contrast: Some(0.28),
                ..RawMeasurement::default()
            }),
            ..RawConfig::default()
        }),
        other => Err(CliError::usage(format!(
            "unknown preset {other:?}; available presets: kovachy2015"
        ))),
    }
}

/// A parameter scan axis, i.e. which config field `scan` varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanAxis {
    DMaxM,
    HalfTimeS,
    SpeciesMassAmu,
    DensityFraction,
}

impl ScanAxis {
    pub const NAMES: [&'static str; 4] = [
        "d_max_m",
        "half_time_s",
        "species_mass_amu",
        "density_fraction",
    ];

    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "d_max_m" => Ok(ScanAxis::DMaxM),
            "half_time_s" => Ok(ScanAxis::HalfTimeS),
            "species_mass_amu" => Ok(ScanAxis::SpeciesMassAmu),
            "density_fraction" => Ok(ScanAxis::DensityFraction),
            other => Err(CliError::usage(format!(
                "invalid scan axis {other:?}; valid axes: {}",
                Self::NAMES.join(", ")
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScanAxis::DMaxM => "d_max_m",
            ScanAxis::HalfTimeS => "half_time_s",
            ScanAxis::SpeciesMassAmu => "species_mass_amu",
            ScanAxis::DensityFraction => "density_fraction",
        }
    }
}

/// Model inputs plus the kernel rate convention.
#[derive(Debug, Clone, Copy)]
pub struct ModelConfig {
    pub params: EllisParameters,
    /// Quadratic-kernel prefactor, exactly 1 or 0.5.
    pub prefactor: f64,
}

/// Measurement inputs with defaults applied (coherence 1/2, attribution 1).
#[derive(Debug, Clone, Copy)]
pub struct MeasurementConfig {
    pub contrast: Option<f64>,
    pub initial_coherence: f64,
    pub attribution_fraction: f64,
}

/// `[output]` options; `None` fields fall back to command-line defaults.
#[derive(Debug, Clone, Default)]
pub struct OutputOptions {
    pub csv: Option<PathBuf>,
    pub precision: Option<usize>,
}

/// Fully validated configuration, ready for subcommands. Keeps the merged
/// raw document around so scans can re-resolve it with one field swapped.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub constants: PhysicalConstants,
    pub model: Option<ModelConfig>,
    pub trajectory: Option<Trajectory>,
    pub measurement: MeasurementConfig,
    pub output: OutputOptions,
    raw: RawConfig,
    /// Samples loaded from `samples_csv`, cached so scans do not re-read
    /// the file per point.
    samples: Option<(Vec<f64>, Vec<f64>)>,
}

/// Validate a merged raw document into core types.
pub fn resolve(raw: RawConfig) -> Result<ResolvedConfig, CliError> {
    resolve_with_samples(raw, None)
}

fn resolve_with_samples(
    raw: RawConfig,
    preloaded: Option<(Vec<f64>, Vec<f64>)>,
) -> Result<ResolvedConfig, CliError> {
    let constants = match &raw.constants {
        None => PhysicalConstants::default(),
        Some(c) => PhysicalConstants::with_overrides(
            c.c_m_per_s,
            c.hbar_j_s,
            c.planck_mass_kg,
            c.nucleon_mass_kg,
        )
        .map_err(|e| CliError::usage(format!("[constants]: {e}")))?,
    };

    let model = match &raw.model {
        None => None,
        Some(m) => {
            let mass_amu = m.species_mass_amu.ok_or_else(|| {
                CliError::usage("missing [model] species_mass_amu".to_string())
            })?;
            let density = m.density_fraction.unwrap_or(1.0);
            let prefactor = m.prefactor.unwrap_or(1.0);
            if prefactor != 1.0 && prefactor != 0.5 {
                return Err(CliError::usage(format!(
                    "[model] prefactor must be exactly 1 or 0.5, got {prefactor}"
                )));
            }
            let params = EllisParameters::for_species_amu(mass_amu, density, constants)
                .map_err(|e| CliError::usage(format!("[model]: {e}")))?;
            Some(ModelConfig { params, prefactor })
        }
    };

    // [recoils] derives the apex separation, overriding any d_max_m.
    let derived_d_max = match &raw.recoils {
        None => None,
        Some(r) => {
            let n = r
                .n
                .ok_or_else(|| CliError::usage("missing [recoils] n".to_string()))?;
            let wavelength_nm = r.wavelength_nm.ok_or_else(|| {
                CliError::usage("missing [recoils] wavelength_nm".to_string())
            })?;
            let drift_time_s = r.drift_time_s.ok_or_else(|| {
                CliError::usage("missing [recoils] drift_time_s".to_string())
            })?;
            let model = model.as_ref().ok_or_else(|| {
                CliError::usage(
                    "[recoils] needs [model] species_mass_amu to set the atom mass"
                        .to_string(),
                )
            })?;
            let wavelength = Quantity::try_new(wavelength_nm * 1e-9, Dimension::LENGTH)
                .map_err(|e| CliError::usage(format!("[recoils] wavelength_nm: {e}")))?;
            let drift = Quantity::try_new(drift_time_s, Dimension::TIME)
                .map_err(|e| CliError::usage(format!("[recoils] drift_time_s: {e}")))?;
            let kinematics = RecoilKinematics::from_wavelength(
                n,
                wavelength,
                model.params.system_mass,
                drift,
            )
            .map_err(|e| CliError::usage(format!("[recoils]: {e}")))?;
            Some(max_separation_from_recoils(&kinematics, &constants))
        }
    };

    let mut samples = preloaded;
    let trajectory = match &raw.trajectory {
        None => {
            if derived_d_max.is_some() {
                return Err(CliError::usage(
                    "[recoils] is set but [trajectory] (shape, half_time_s) is missing"
                        .to_string(),
                ));
            }
            None
        }
        Some(t) => {
            let shape = t.shape.as_deref().ok_or_else(|| {
                CliError::usage(
                    "missing [trajectory] shape (\"paper\", \"triangular\", \
                     \"constant\", or \"sampled\")"
                        .to_string(),
                )
            })?;
            if shape != "sampled" && t.samples_csv.is_some() {
                return Err(CliError::usage(format!(
                    "[trajectory] samples_csv is only used when shape = \"sampled\" \
                     (shape is {shape:?})"
                )));
            }
            match shape {
                "paper" | "triangular" | "constant" => {
                    let d_max = match derived_d_max {
                        Some(q) => q,
                        None => {
                            let v = t.d_max_m.ok_or_else(|| {
                                CliError::usage("missing [trajectory] d_max_m".to_string())
                            })?;
                            Quantity::try_new(v, Dimension::LENGTH).map_err(|e| {
                                CliError::usage(format!("[trajectory] d_max_m: {e}"))
                            })?
                        }
                    };
                    let half_time_s = t.half_time_s.ok_or_else(|| {
                        CliError::usage("missing [trajectory] half_time_s".to_string())
                    })?;
                    let half_time = Quantity::try_new(half_time_s, Dimension::TIME)
                        .map_err(|e| {
                            CliError::usage(format!("[trajectory] half_time_s: {e}"))
                        })?;
                    let built = match shape {
                        "paper" => Trajectory::smoothed_ramp(d_max, half_time),
                        "triangular" => Trajectory::triangular(d_max, half_time),
                        // The symmetric variants span 2T; a constant hold over
                        // the same span keeps half_time meaning "T" everywhere.
                        _ => Trajectory::constant(d_max, half_time * 2.0),
                    };
                    Some(built.map_err(|e| CliError::usage(format!("[trajectory]: {e}")))?)
                }
                "sampled" => {
                    if derived_d_max.is_some() {
                        return Err(CliError::usage(
                            "[recoils] cannot drive a sampled trajectory; remove the \
                             [recoils] section or switch shape"
                                .to_string(),
                        ));
                    }
                    let (times, seps) = match samples.take() {
                        Some(s) => s,
                        None => {
                            let path = t.samples_csv.as_deref().ok_or_else(|| {
                                CliError::usage(
                                    "missing [trajectory] samples_csv".to_string(),
                                )
                            })?;
                            load_samples(Path::new(path))?
                        }
                    };
                    let built = Trajectory::sampled(times.clone(), seps.clone())
                        .map_err(|e| {
                            CliError::usage(format!("[trajectory] samples_csv: {e}"))
                        })?;
                    samples = Some((times, seps));
                    Some(built)
                }
                other => {
                    return Err(CliError::usage(format!(
                        "[trajectory] shape must be one of \"paper\", \"triangular\", \
                         \"constant\", \"sampled\"; got {other:?}"
                    )))
                }
            }
        }
    };

    let measurement = {
        let m = raw.measurement.clone().unwrap_or_default();
        let initial_coherence = m.initial_coherence.unwrap_or(0.5);
        let attribution_fraction = m.attribution_fraction.unwrap_or(1.0);
        if !initial_coherence.is_finite()
            || !(0.0 < initial_coherence && initial_coherence <= 0.5)
        {
            return Err(CliError::usage(format!(
                "[measurement] initial_coherence must lie in (0, 0.5], got \
                 {initial_coherence}"
            )));
        }
        if !attribution_fraction.is_finite()
            || !(0.0 < attribution_fraction && attribution_fraction <= 1.0)
        {
            return Err(CliError::usage(format!(
                "[measurement] attribution_fraction must lie in (0, 1], got \
                 {attribution_fraction}"
            )));
        }
        if let Some(c) = m.contrast {
            // Validate eagerly so a bad config always fails at load time.
            qgdec_core::bounds::MeasuredContrast::new(
                c,
                initial_coherence,
                attribution_fraction,
            )
            .map_err(|e| CliError::usage(format!("[measurement] contrast: {e}")))?;
        }
        MeasurementConfig {
            contrast: m.contrast,
            initial_coherence,
            attribution_fraction,
        }
    };

    let output = match &raw.output {
        None => OutputOptions::default(),
        Some(o) => {
            if o.precision == Some(0) {
                return Err(CliError::usage(
                    "[output] precision must be at least 1".to_string(),
                ));
            }
            OutputOptions {
                csv: o.csv.clone().map(PathBuf::from),
                precision: o.precision,
            }
        }
    };

    Ok(ResolvedConfig {
        constants,
        model,
        trajectory,
        measurement,
        output,
        raw,
        samples,
    })
}

impl ResolvedConfig {
    pub fn require_model(&self) -> Result<&ModelConfig, CliError> {
        self.model.as_ref().ok_or_else(|| {
            CliError::usage(
                "missing [model] species_mass_amu; set it in the config or use \
                 --preset kovachy2015"
                    .to_string(),
            )
        })
    }

    pub fn require_trajectory(&self) -> Result<&Trajectory, CliError> {
        self.trajectory.as_ref().ok_or_else(|| {
            CliError::usage(
                "missing [trajectory] section; set shape/d_max_m/half_time_s or use \
                 --preset kovachy2015"
                    .to_string(),
            )
        })
    }

    /// Re-resolve this configuration with one scan axis swapped to `value`.
    /// Cached trajectory samples are reused, so sampled configs never re-read
    /// their CSV per scan point.
    pub fn with_axis_value(&self, axis: ScanAxis, value: f64) -> Result<Self, CliError> {
        let mut raw = self.raw.clone();
        let sampled_shape = raw
            .trajectory
            .as_ref()
            .and_then(|t| t.shape.as_deref())
            == Some("sampled");
        match axis {
            ScanAxis::DMaxM => {
                if raw.recoils.is_some() {
                    return Err(CliError::usage(
                        "scan axis d_max_m conflicts with [recoils]: d_max is derived \
                         from the recoil kinematics there"
                            .to_string(),
                    ));
                }
                if sampled_shape {
                    return Err(CliError::usage(
                        "scan axis d_max_m is not supported for sampled trajectories"
                            .to_string(),
                    ));
                }
                raw.trajectory.get_or_insert_with(Default::default).d_max_m = Some(value);
            }
            ScanAxis::HalfTimeS => {
                if sampled_shape {
                    return Err(CliError::usage(
                        "scan axis half_time_s is not supported for sampled trajectories"
                            .to_string(),
                    ));
                }
                raw.trajectory
                    .get_or_insert_with(Default::default)
                    .half_time_s = Some(value);
                // The recoil drift time is the same T; keep them in lockstep so
                // the derived d_max follows the scan (d_max = n (hbar k / m) T).
                if let Some(recoils) = raw.recoils.as_mut() {
                    recoils.drift_time_s = Some(value);
                }
            }
            ScanAxis::SpeciesMassAmu => {
                raw.model
                    .get_or_insert_with(Default::default)
                    .species_mass_amu = Some(value);
            }
            ScanAxis::DensityFraction => {
                raw.model
                    .get_or_insert_with(Default::default)
                    .density_fraction = Some(value);
            }
        }
        resolve_with_samples(raw, self.samples.clone())
    }
}

/// Load a sampled-trajectory CSV: header `t_s,d_m`, then one `time,separation`
/// pair per line, times strictly ascending. This is exactly what the
/// `trajectory` subcommand emits, so trajectories round-trip through files.
fn load_samples(path: &Path) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::usage(format!("cannot read samples csv {}: {e}", path.display()))
    })?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::usage(format!("samples csv {} is empty", path.display())))?;
    if header.trim() != "t_s,d_m" {
        return Err(CliError::usage(format!(
            "samples csv {} must start with the header `t_s,d_m`, found {header:?}",
            path.display()
        )));
    }
    let mut times = Vec::new();
    let mut separations = Vec::new();
    for (index, line) in lines.enumerate() {
        let line_no = index + 2;
        if line.trim().is_empty() {
            continue;
        }
        let mut cells = line.split(',');
        let (Some(t), Some(d), None) = (cells.next(), cells.next(), cells.next()) else {
            return Err(CliError::usage(format!(
                "samples csv {} line {line_no}: expected exactly two cells `t_s,d_m`",
                path.display()
            )));
        };
        let parse = |cell: &str, name: &str| -> Result<f64, CliError> {
            cell.trim().parse::<f64>().map_err(|_| {
                CliError::usage(format!(
                    "samples csv {} line {line_no}: cannot parse {name} from {cell:?}",
                    path.display()
                ))
            })
        };
        times.push(parse(t, "t_s")?);
        separations.push(parse(d, "d_m")?);
    }
    Ok((times, separations))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_expands_to_the_published_point() {
        let raw = preset("kovachy2015").unwrap();
        let resolved = resolve(raw).unwrap();
        let model = resolved.model.unwrap();
        assert_eq!(
            model.params.system_mass.value(),
            86.909 * resolved.constants.amu.value()
        );
        assert_eq!(model.params.density_fraction, 1.0);
        assert_eq!(model.prefactor, 1.0);
        let trajectory = resolved.trajectory.unwrap();
        assert_eq!(trajectory.max_separation().value(), 0.54);
        assert_eq!(trajectory.half_time().value(), 1.04);
        assert_eq!(resolved.measurement.contrast, Some(0.28));
        assert_eq!(resolved.measurement.initial_coherence, 0.5);
        assert_eq!(resolved.measurement.attribution_fraction, 1.0);
    }

    #[test]
    fn unknown_preset_is_rejected() {
        assert!(preset("kovachy2016").is_err());
    }

    #[test]
    fn file_fields_override_preset_fields_individually() {
        let file = parse_config("[trajectory]\nd_max_m = 0.27\n").unwrap();
        let merged = file.merged_over(preset("kovachy2015").unwrap());
        let resolved = resolve(merged).unwrap();
        let trajectory = resolved.trajectory.unwrap();
        // One field swapped, the rest of the preset intact.
        assert_eq!(trajectory.max_separation().value(), 0.27);
        assert_eq!(trajectory.half_time().value(), 1.04);
        assert_eq!(resolved.measurement.contrast, Some(0.28));
    }

    #[test]
    fn unknown_keys_are_hard_errors() {
        let err = parse_config("[model]\nspecies_mass_am = 1.0\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("species_mass_am"), "{msg}");
    }

    #[test]
    fn syntax_errors_carry_a_line_number() {
        let err = parse_config("[model\nspecies_mass_amu = 1.0\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 1"), "{msg}");
    }

    #[test]
    fn validation_errors_name_the_offending_key() {
        let raw = parse_config("[model]\nspecies_mass_amu = -2.0\n").unwrap();
        let msg = resolve(raw).unwrap_err().to_string();
        assert!(msg.contains("[model]"), "{msg}");

        let raw = parse_config(
            "[model]\nspecies_mass_amu = 1.0\n[trajectory]\nshape = \"paper\"\n\
             d_max_m = -0.5\nhalf_time_s = 1.0\n",
        )
        .unwrap();
        let msg = resolve(raw).unwrap_err().to_string();
        assert!(msg.contains("[trajectory]"), "{msg}");

        let raw = parse_config("[output]\nprecision = 0\n").unwrap();
        let msg = resolve(raw).unwrap_err().to_string();
        assert!(msg.contains("precision"), "{msg}");
    }

    #[test]
    fn recoils_override_d_max() {
        let file = parse_config(
            "[recoils]\nn = 90\nwavelength_nm = 780.24\ndrift_time_s = 1.04\n",
        )
        .unwrap();
        let merged = file.merged_over(preset("kovachy2015").unwrap());
        let resolved = resolve(merged).unwrap();
        let d_max = resolved.trajectory.unwrap().max_separation().value();
        // n hbar k T / m for 86.909 amu, not the preset's 0.54.
        assert!((d_max - 0.5507947797532395).abs() < 1e-12, "d_max = {d_max}");
    }

    #[test]
    fn scan_axis_rules() {
        let base = resolve(preset("kovachy2015").unwrap()).unwrap();
        let denser = base.with_axis_value(ScanAxis::DMaxM, 0.27).unwrap();
        assert_eq!(
            denser.trajectory.unwrap().max_separation().value(),
            0.27
        );
        assert!(ScanAxis::parse("species_mass_amu").is_ok());
        assert!(ScanAxis::parse("bogus").is_err());

        let with_recoils = resolve(
            parse_config(
                "[recoils]\nn = 90\nwavelength_nm = 780.24\ndrift_time_s = 1.04\n",
            )
            .unwrap()
            .merged_over(preset("kovachy2015").unwrap()),
        )
        .unwrap();
        assert!(with_recoils.with_axis_value(ScanAxis::DMaxM, 0.1).is_err());
        // half_time_s drives the drift time too: d_max scales linearly in T.
        let double_t = with_recoils
            .with_axis_value(ScanAxis::HalfTimeS, 2.08)
            .unwrap();
        let ratio = double_t.trajectory.unwrap().max_separation().value()
            / with_recoils.trajectory.unwrap().max_separation().value();
        assert!((ratio - 2.0).abs() < 1e-12, "ratio = {ratio}");
    }

    #[test]
    fn empty_document_is_detectable() {
        assert!(parse_config("").unwrap().is_empty());
        assert!(!parse_config("preset = \"kovachy2015\"").unwrap().is_empty());
    }
}
