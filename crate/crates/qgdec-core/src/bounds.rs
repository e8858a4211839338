//! From a measured fringe contrast to an exclusion bound.
//!
//! A balanced two-branch interferometer that keeps contrast `C` after a
//! sweep admits at most
//!
//! ```text
//! exponent_observed = -ln(1 - a * (1 - C / (2 c0)))
//! ```
//!
//! of localization decay, where `c0` is the initial coherence and `a` the
//! fraction of the observed contrast loss attributed to localization
//! (`a = 1` is the conservative choice: all loss is decoherence, none is
//! technical). Under the quadratic kernel the decay exponent is
//! `prefactor * gamma * kappa * d_max^2 * T`, so the measurement caps the
//! rate coefficient at
//!
//! ```text
//! gamma_max = exponent_observed / (prefactor * kappa * d_max^2 * T) .
//! ```
//!
//! Comparing `gamma_max` against the model prediction for the same
//! apparatus gives the exclusion ratio; its reciprocal is the largest
//! density fraction the model can retain.

use crate::evolution::{coherence_decay, CoherenceResult};
use crate::kernels::{gamma_qg, EllisParameters, LocalizationKernel};
use crate::numeric::bisect;
use crate::trajectory::Trajectory;
use crate::units::{Dimension, Quantity};
use crate::{Error, Result};

/// Relative tolerance of the event-rate bisection in
/// [`invert_scattering_event_rate`].
pub const EVENT_RATE_BISECTION_REL_TOL: f64 = 1e-10;

/// Upper end of the event-rate bracket, s^-1. No laboratory environment
/// relevant to this model scatters faster; a bound that lands above this
/// is reported as a numeric failure rather than extrapolated.
pub const EVENT_RATE_BRACKET_MAX: f64 = 1e12;

/// A contrast measurement, as published: the observed value plus the two
/// analysis choices needed to turn it into a bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasuredContrast {
    /// Observed fringe contrast, in (0, 1] and at most `2 * initial_coherence`.
    pub value: f64,
    /// Coherence the apparatus would show with no decay at all, in (0, 1/2].
    pub initial_coherence: f64,
    /// Fraction of the observed loss attributed to localization, in (0, 1].
    pub attribution_fraction: f64,
}

impl MeasuredContrast {
    pub fn new(value: f64, initial_coherence: f64, attribution_fraction: f64) -> Result<Self> {
        if !value.is_finite() || !(0.0 < value && value <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "contrast must lie in (0, 1], got {value}"
            )));
        }
        if !initial_coherence.is_finite() || !(0.0 < initial_coherence && initial_coherence <= 0.5)
        {
            return Err(Error::InvalidInput(format!(
                "initial coherence must lie in (0, 0.5], got {initial_coherence}"
            )));
        }
        if value > 2.0 * initial_coherence {
            return Err(Error::InvalidInput(format!(
                "contrast {value} exceeds the ceiling 2 * initial_coherence = {}",
                2.0 * initial_coherence
            )));
        }
        if !attribution_fraction.is_finite()
            || !(0.0 < attribution_fraction && attribution_fraction <= 1.0)
        {
            return Err(Error::InvalidInput(format!(
                "attribution fraction must lie in (0, 1], got {attribution_fraction}"
            )));
        }
        Ok(MeasuredContrast {
            value,
            initial_coherence,
            attribution_fraction,
        })
    }

    /// `-ln(1 - a * (1 - C / (2 c0)))`: the decay exponent the measurement
    /// allows. Exactly 0 when the contrast sits at its no-decay ceiling.
    pub fn observed_exponent(&self) -> f64 {
        let survival = self.value / (2.0 * self.initial_coherence);
        if survival >= 1.0 {
            return 0.0;
        }
        if self.attribution_fraction == 1.0 {
            // Algebraically 1 - a*(1 - s) == s here; evaluating it that way
            // keeps the exponent exact when the surviving contrast is far
            // below one ulp of 1 (s ~ e^-300), where the subtraction form
            // would round `loss` to 1 and return infinity.
            return -survival.ln();
        }
        -(1.0 - self.attribution_fraction * (1.0 - survival)).ln()
    }
}

/// An inverted bound on the quadratic-kernel rate coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaBound {
    /// Decay exponent the measurement allows.
    pub exponent_observed: f64,
    /// Largest rate coefficient compatible with the measurement, m^-2 s^-1.
    /// Exactly zero when no contrast loss was observed.
    pub gamma_max: Quantity,
    /// Geometric factor of the trajectory used in the inversion.
    pub kappa: f64,
    /// Kernel prefactor convention used in the inversion (1 or 1/2).
    pub prefactor: f64,
}

/// Invert a contrast measurement into `gamma_max` for the given sweep.
///
/// The trajectory must have nonzero geometric weight; `prefactor` selects
/// the rate convention exactly as in
/// [`LocalizationKernel::Quadratic`](crate::kernels::LocalizationKernel).
pub fn invert_bound(
    measured: &MeasuredContrast,
    trajectory: &Trajectory,
    prefactor: f64,
) -> Result<GammaBound> {
    if prefactor != 1.0 && prefactor != 0.5 {
        return Err(Error::InvalidInput(format!(
            "prefactor must be exactly 1 or 0.5, got {prefactor}"
        )));
    }
    let kappa = trajectory.geometric_factor()?;
    if !(kappa > 0.0) {
        return Err(Error::InvalidInput(
            "trajectory has no geometric weight (kappa = 0); it cannot bound gamma".into(),
        ));
    }
    let exponent_observed = measured.observed_exponent();
    let d_max = trajectory.max_separation();
    let denominator = prefactor * kappa * d_max.powi(2) * trajectory.half_time();
    let gamma_max = (Quantity::dimensionless(exponent_observed) / denominator)
        .expect_dim(Dimension::LOCALIZATION_RATE, "gamma_max");
    Ok(GammaBound {
        exponent_observed,
        gamma_max,
        kappa,
        prefactor,
    })
}

/// How the bound relates to the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundStatus {
    /// A finite bound: the model at full density overshoots the data by
    /// `exclusion_ratio`.
    Bounded,
    /// The measurement saw no contrast loss at all; the bound is zero and
    /// the exclusion ratio infinite.
    NoObservedLoss,
}

/// Outcome of comparing a [`GammaBound`] against a model prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundResult {
    /// Model rate at full density fraction, m^-2 s^-1.
    pub gamma_model: Quantity,
    /// `gamma_model / gamma_max`; `f64::INFINITY` when `gamma_max` is zero.
    pub exclusion_ratio: f64,
    /// Largest density fraction the model survives with: `1 / exclusion_ratio`.
    pub density_fraction_max: f64,
    pub status: BoundStatus,
}

/// Compare a measured bound against the model evaluated at full density
/// fraction (the published estimate has `density_fraction = 1`; whatever
/// fraction the caller's model carries is ignored here so the ratio always
/// refers to the undiluted prediction).
pub fn exclusion_ratio(bound: &GammaBound, model: &EllisParameters) -> BoundResult {
    let full = EllisParameters {
        density_fraction: 1.0,
        ..*model
    };
    let gamma_model = gamma_qg(&full);
    let g_max = bound.gamma_max.value();
    if g_max == 0.0 {
        return BoundResult {
            gamma_model,
            exclusion_ratio: f64::INFINITY,
            density_fraction_max: 0.0,
            status: BoundStatus::NoObservedLoss,
        };
    }
    BoundResult {
        gamma_model,
        exclusion_ratio: gamma_model.value() / g_max,
        density_fraction_max: g_max / gamma_model.value(),
        status: BoundStatus::Bounded,
    }
}

/// Predicted contrast for a species of the given mass flown through the
/// same sweep, using the quadratic kernel at the model's density fraction
/// (prefactor 1 convention).
pub fn predict_species(
    model: &EllisParameters,
    species_mass: Quantity,
    trajectory: &Trajectory,
    initial_coherence: f64,
) -> Result<CoherenceResult> {
    let params = EllisParameters::new(species_mass, model.density_fraction, model.constants)?;
    let kernel = LocalizationKernel::quadratic(gamma_qg(&params), 1.0)?;
    coherence_decay(&kernel, trajectory, initial_coherence)
}

/// Invert a contrast measurement into a bound on the scattering event rate
/// `R` of a [`ScatteringOverlap`](crate::kernels::LocalizationKernel)
/// kernel with the given momentum spread.
///
/// The decay exponent grows monotonically (in fact linearly) with `R`, so
/// the bound is found by bisection on `[0, EVENT_RATE_BRACKET_MAX]`.
/// Returns 0 s^-1 exactly when no contrast loss was observed.
pub fn invert_scattering_event_rate(
    measured: &MeasuredContrast,
    trajectory: &Trajectory,
    sigma: Quantity,
) -> Result<Quantity> {
    let target = measured.observed_exponent();
    if target == 0.0 {
        return Ok(Quantity::per_second(0.0));
    }
    let exponent_at = |rate: f64| -> Result<f64> {
        let kernel =
            LocalizationKernel::scattering_overlap(Quantity::per_second(rate), sigma)?;
        Ok(coherence_decay(&kernel, trajectory, measured.initial_coherence)?.exponent)
    };
    let at_max = exponent_at(EVENT_RATE_BRACKET_MAX)?;
    if at_max < target {
        return Err(Error::Numeric(format!(
            "even an event rate of {EVENT_RATE_BRACKET_MAX:e} s^-1 only reaches a decay \
             exponent of {at_max:e} (need {target:e}); the bound is not representable \
             for this sigma and trajectory"
        )));
    }
    let rate = bisect(
        |r| Ok(exponent_at(r)? - target),
        0.0,
        EVENT_RATE_BRACKET_MAX,
        EVENT_RATE_BISECTION_REL_TOL,
    )?;
    Ok(Quantity::per_second(rate))
}
