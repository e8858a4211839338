//! Localization-kernel models: the instantaneous decay rate `D(dx)` of a
//! spatial coherence `<x|rho|x'>` at branch separation `dx = |x - x'|`.
//!
//! Two interchangeable forms:
//!
//! * [`LocalizationKernel::Quadratic`] — `D(dx) = prefactor * gamma * dx^2`,
//!   the universal small-separation law. The rate constant of interest is
//!   the wormhole estimate of Ellis, Mohanty and Nanopoulos (1989),
//!
//!   ```text
//!   gamma_QG = (c m0)^4 m^2 / (hbar m_Pl)^3
//!   ```
//!
//!   for a system of mass `m` built from nucleons of mass `m0`, optionally
//!   scaled by the fraction of the ambient density that participates.
//!
//! * [`LocalizationKernel::ScatteringOverlap`] — the rate implied by
//!   elastic scattering events that imprint which-path information:
//!   `D(dx) = R * <1 - sinc(p dx)>`, averaging over a thermal-style radial
//!   momentum distribution `w(p) ∝ p^2 exp(-p^2 / 2 sigma^2)`. It reduces
//!   to the quadratic law with coefficient `R sigma^2 / 2` for
//!   `dx << 1/sigma` and saturates at the event rate `R` once the scattered
//!   states become orthogonal.
//!
//! Momenta are quoted as wavenumbers (m^-1) throughout, i.e. `p` here is
//! momentum divided by `hbar`.

use crate::numeric::integrate;
use crate::units::{Dimension, PhysicalConstants, Quantity};
use crate::{Error, Result};

/// Relative tolerance for the momentum average in the scattering-overlap
/// kernel. 1e-8 keeps the kernel evaluation cheap enough to sit inside the
/// time quadrature of the decay integral while staying far below any
/// experimentally meaningful precision.
pub const MOMENTUM_AVERAGE_REL_TOL: f64 = 1e-8;

/// Upper cutoff of the momentum average in units of `sigma`. The weight
/// `p^2 exp(-p^2/2 sigma^2)` beyond `12 sigma` carries less than 1e-29 of
/// the total, far below `MOMENTUM_AVERAGE_REL_TOL`.
const MOMENTUM_CUTOFF_SIGMAS: f64 = 12.0;

/// Inputs of the wormhole localization-rate estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllisParameters {
    /// Total mass of the delocalized system, kg.
    pub system_mass: Quantity,
    /// Fraction of the ambient wormhole density assumed to participate,
    /// in [0, 1]. 1 is the original estimate; smaller values scale the
    /// rate linearly.
    pub density_fraction: f64,
    pub constants: PhysicalConstants,
}

impl EllisParameters {
    pub fn new(
        system_mass: Quantity,
        density_fraction: f64,
        constants: PhysicalConstants,
    ) -> Result<Self> {
        if system_mass.dim() != Dimension::MASS {
            return Err(Error::Dimension(format!(
                "system_mass must carry kg, got {}",
                system_mass.dim()
            )));
        }
        if !(system_mass.value() > 0.0) {
            return Err(Error::InvalidInput(format!(
                "system_mass must be strictly positive, got {}",
                system_mass.value()
            )));
        }
        if !density_fraction.is_finite() || !(0.0..=1.0).contains(&density_fraction) {
            return Err(Error::InvalidInput(format!(
                "density_fraction must lie in [0, 1], got {density_fraction}"
            )));
        }
        Ok(EllisParameters {
            system_mass,
            density_fraction,
            constants,
        })
    }

    /// Convenience constructor for a species mass quoted in atomic mass
    /// units, the way interferometry papers state it.
    pub fn for_species_amu(
        mass_amu: f64,
        density_fraction: f64,
        constants: PhysicalConstants,
    ) -> Result<Self> {
        if !mass_amu.is_finite() || mass_amu <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "species mass must be strictly positive, got {mass_amu} amu"
            )));
        }
        EllisParameters::new(mass_amu * constants.amu, density_fraction, constants)
    }
}

/// The wormhole localization rate constant
/// `gamma_QG = density_fraction * (c m0)^4 m^2 / (hbar m_Pl)^3`, in
/// m^-2 s^-1.
///
/// For a single nucleon this is ~1.5e-2 m^-2 s^-1; the m^2 scaling lifts it
/// to ~1e2 m^-2 s^-1 for one rubidium atom, which is what makes large-area
/// atom interferometers competitive probes.
pub fn gamma_qg(params: &EllisParameters) -> Quantity {
    let k = &params.constants;
    let numerator = (k.c * k.m_nucleon).powi(4) * params.system_mass.powi(2);
    let denominator = (k.hbar * k.m_planck).powi(3);
    (params.density_fraction * (numerator / denominator))
        .expect_dim(Dimension::LOCALIZATION_RATE, "gamma_qg")
}

/// Momentum spread (as a wavenumber, m^-1) of the wormhole background seen
/// by a laboratory system: `sigma = c m0^2 / (hbar m_Pl)`.
///
/// Numerically ~4e-4 m^-1, so the quadratic regime extends out to branch
/// separations of kilometres; every laboratory trajectory in this crate
/// sits deep inside it.
pub fn wormhole_sigma(constants: &PhysicalConstants) -> Quantity {
    (constants.c * constants.m_nucleon.powi(2) / (constants.hbar * constants.m_planck))
        .expect_dim(Dimension::WAVENUMBER, "wormhole_sigma")
}

/// A localization kernel: maps branch separation to an instantaneous
/// coherence-decay rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LocalizationKernel {
    /// `D(dx) = prefactor * gamma * dx^2`. The prefactor selects between
    /// the two rate conventions in circulation, `gamma d^2` (1) and
    /// `gamma d^2 / 2` (1/2); no other value is meaningful.
    Quadratic { gamma: Quantity, prefactor: f64 },
    /// `D(dx) = event_rate * <1 - sinc(p dx)>` with the average taken over
    /// `w(p) ∝ p^2 exp(-p^2 / 2 sigma^2)` on p in (0, inf).
    ScatteringOverlap {
        /// Total scattering event rate R, s^-1.
        event_rate: Quantity,
        /// Momentum spread of the scatterers as a wavenumber, m^-1.
        sigma: Quantity,
    },
}

impl LocalizationKernel {
    /// Quadratic kernel. `gamma` must be a localization rate (m^-2 s^-1,
    /// zero allowed — it switches decoherence off); `prefactor` must be
    /// exactly 1 or 1/2.
    pub fn quadratic(gamma: Quantity, prefactor: f64) -> Result<Self> {
        if gamma.dim() != Dimension::LOCALIZATION_RATE {
            return Err(Error::Dimension(format!(
                "gamma must carry m^-2 s^-1, got {}",
                gamma.dim()
            )));
        }
        if !(gamma.value() >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "gamma must be non-negative, got {}",
                gamma.value()
            )));
        }
        if prefactor != 1.0 && prefactor != 0.5 {
            return Err(Error::InvalidInput(format!(
                "prefactor must be exactly 1 or 0.5, got {prefactor}"
            )));
        }
        Ok(LocalizationKernel::Quadratic { gamma, prefactor })
    }

    /// Scattering-overlap kernel. `event_rate` must be s^-1 (zero allowed),
    /// `sigma` strictly positive m^-1.
    pub fn scattering_overlap(event_rate: Quantity, sigma: Quantity) -> Result<Self> {
        if event_rate.dim() != Dimension::RATE {
            return Err(Error::Dimension(format!(
                "event_rate must carry s^-1, got {}",
                event_rate.dim()
            )));
        }
        if !(event_rate.value() >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "event_rate must be non-negative, got {}",
                event_rate.value()
            )));
        }
        if sigma.dim() != Dimension::WAVENUMBER {
            return Err(Error::Dimension(format!(
                "sigma must carry m^-1, got {}",
                sigma.dim()
            )));
        }
        if !(sigma.value() > 0.0) {
            return Err(Error::InvalidInput(format!(
                "sigma must be strictly positive, got {}",
                sigma.value()
            )));
        }
        Ok(LocalizationKernel::ScatteringOverlap { event_rate, sigma })
    }

    /// Instantaneous decay rate at the given branch separation (m, >= 0),
    /// in s^-1.
    pub fn rate(&self, separation: Quantity) -> Result<Quantity> {
        if separation.dim() != Dimension::LENGTH {
            return Err(Error::Dimension(format!(
                "separation must carry m, got {}",
                separation.dim()
            )));
        }
        let dx = separation.value();
        if dx < 0.0 {
            return Err(Error::InvalidInput(format!(
                "separation must be non-negative, got {dx}"
            )));
        }
        match *self {
            LocalizationKernel::Quadratic { gamma, prefactor } => {
                Ok((prefactor * gamma * separation.powi(2))
                    .expect_dim(Dimension::RATE, "quadratic kernel rate"))
            }
            LocalizationKernel::ScatteringOverlap { event_rate, sigma } => {
                let rate = event_rate.value();
                if dx == 0.0 || rate == 0.0 {
                    return Ok(Quantity::per_second(0.0));
                }
                let deficit = overlap_deficit(sigma.value(), dx)?;
                Ok(Quantity::per_second(rate * deficit))
            }
        }
    }

    /// Coefficient of the `dx^2` law this kernel obeys as `dx -> 0`, in
    /// m^-2 s^-1. For the quadratic kernel this is `prefactor * gamma`
    /// itself; for the scattering kernel it is `R <p^2> / 6 = R sigma^2 / 2`
    /// (the radial weight has `<p^2> = 3 sigma^2`).
    pub fn quadratic_limit_coefficient(&self) -> Quantity {
        match *self {
            LocalizationKernel::Quadratic { gamma, prefactor } => prefactor * gamma,
            LocalizationKernel::ScatteringOverlap { event_rate, sigma } => {
                (event_rate * sigma.powi(2) / 2.0)
                    .expect_dim(Dimension::LOCALIZATION_RATE, "quadratic limit")
            }
        }
    }
}

/// `<1 - sinc(p dx)>` over the radial weight `p^2 exp(-p^2/2 sigma^2)`,
/// computed by quadrature on (0, 12 sigma]. Clamped to the physical range
/// [0, 1] to absorb quadrature noise at the saturation plateau.
fn overlap_deficit(sigma: f64, dx: f64) -> Result<f64> {
    let p_max = MOMENTUM_CUTOFF_SIGMAS * sigma;
    let weight = |p: f64| p * p * (-0.5 * (p / sigma) * (p / sigma)).exp();
    let numerator = integrate(
        |p| weight(p) * one_minus_sinc(p * dx),
        0.0,
        p_max,
        MOMENTUM_AVERAGE_REL_TOL,
    )?;
    let denominator = integrate(weight, 0.0, p_max, MOMENTUM_AVERAGE_REL_TOL)?;
    if !(denominator > 0.0) {
        return Err(Error::Numeric(format!(
            "momentum weight integrated to {denominator:e} for sigma = {sigma:e}"
        )));
    }
    Ok((numerator / denominator).clamp(0.0, 1.0))
}

/// `1 - sin(z)/z`, computed without the cancellation that the naive
/// subtraction suffers for small `z` (the value is ~z^2/6 there, far below
/// the rounding noise of `1 - sinc`). Below `|z| = 0.1` the three-term
/// series is good to ~2e-11 relative; above it the direct form is good to
/// ~1e-13 relative.
fn one_minus_sinc(z: f64) -> f64 {
    let z2 = z * z;
    if z2 < 1e-2 {
        z2 / 6.0 - z2 * z2 / 120.0 + z2 * z2 * z2 / 5040.0
    } else {
        1.0 - z.sin() / z
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rel_diff(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    // Hand-evaluated with the pinned CODATA-2018 constants:
    //   gamma_QG(87 amu) = (c m_p)^4 (87 amu)^2 / (hbar m_Pl)^3
    const GAMMA_87AMU: f64 = 109.13037858980054;
    const GAMMA_SINGLE_NUCLEON: f64 = 0.014628659384924835;
    const SIGMA_WORMHOLE: f64 = 3.6542193107785255e-4;

    #[test]
    fn gamma_qg_matches_hand_evaluation() {
        let params =
            EllisParameters::for_species_amu(87.0, 1.0, PhysicalConstants::default()).unwrap();
        let g = gamma_qg(&params);
        assert_eq!(g.dim(), Dimension::LOCALIZATION_RATE);
        assert!(
            rel_diff(g.value(), GAMMA_87AMU) < 1e-13,
            "gamma = {:e}",
            g.value()
        );
    }

    #[test]
    fn gamma_qg_single_nucleon() {
        let k = PhysicalConstants::default();
        let params = EllisParameters::new(k.m_nucleon, 1.0, k).unwrap();
        let g = gamma_qg(&params).value();
        assert!(rel_diff(g, GAMMA_SINGLE_NUCLEON) < 1e-13, "gamma = {g:e}");
    }

    #[test]
    fn gamma_qg_linear_in_density_fraction() {
        let k = PhysicalConstants::default();
        let full = gamma_qg(&EllisParameters::for_species_amu(87.0, 1.0, k).unwrap());
        let half = gamma_qg(&EllisParameters::for_species_amu(87.0, 0.5, k).unwrap());
        assert_eq!(half.value(), 0.5 * full.value());
    }

    #[test]
    fn gamma_qg_scales_with_mass_squared() {
        let k = PhysicalConstants::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let m = rng.random_range(1.0..500.0);
            let s = rng.random_range(1.5..10.0);
            let g1 = gamma_qg(&EllisParameters::for_species_amu(m, 1.0, k).unwrap()).value();
            let g2 = gamma_qg(&EllisParameters::for_species_amu(s * m, 1.0, k).unwrap()).value();
            assert!(
                rel_diff(g2, s * s * g1) < 1e-14,
                "m = {m}, s = {s}: {g2:e} vs {:e}",
                s * s * g1
            );
        }
    }

    #[test]
    fn ellis_parameters_validate() {
        let k = PhysicalConstants::default();
        assert!(matches!(
            EllisParameters::for_species_amu(-1.0, 1.0, k),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            EllisParameters::for_species_amu(87.0, 1.5, k),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            EllisParameters::new(Quantity::seconds(1.0), 1.0, k),
            Err(Error::Dimension(_))
        ));
        // amu conversion uses the table's amu entry.
        let p = EllisParameters::for_species_amu(86.909, 1.0, k).unwrap();
        assert_eq!(p.system_mass.value(), 86.909 * 1.66053907e-27);
    }

    #[test]
    fn wormhole_sigma_matches_hand_evaluation() {
        let s = wormhole_sigma(&PhysicalConstants::default());
        assert_eq!(s.dim(), Dimension::WAVENUMBER);
        assert!(
            rel_diff(s.value(), SIGMA_WORMHOLE) < 1e-13,
            "sigma = {:e}",
            s.value()
        );
    }

    #[test]
    fn quadratic_rate_is_exact_arithmetic() {
        let kernel =
            LocalizationKernel::quadratic(Quantity::localization_rate(2.5), 0.5).unwrap();
        let r = kernel.rate(Quantity::meters(0.3)).unwrap();
        assert_eq!(r.dim(), Dimension::RATE);
        assert_eq!(r.value(), 0.5 * 2.5 * 0.3 * 0.3);

        let full = LocalizationKernel::quadratic(Quantity::localization_rate(2.5), 1.0).unwrap();
        assert_eq!(
            full.rate(Quantity::meters(0.3)).unwrap().value(),
            2.0 * r.value()
        );
    }

    #[test]
    fn constructors_reject_bad_inputs() {
        let g = Quantity::localization_rate(1.0);
        assert!(matches!(
            LocalizationKernel::quadratic(g, 0.7),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            LocalizationKernel::quadratic(Quantity::per_second(1.0), 1.0),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            LocalizationKernel::quadratic(Quantity::localization_rate(-1.0), 1.0),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            LocalizationKernel::scattering_overlap(Quantity::per_second(1.0), Quantity::per_meter(0.0)),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            LocalizationKernel::scattering_overlap(Quantity::seconds(1.0), Quantity::per_meter(1.0)),
            Err(Error::Dimension(_))
        ));

        let kernel = LocalizationKernel::quadratic(g, 1.0).unwrap();
        assert!(matches!(
            kernel.rate(Quantity::meters(-0.1)),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            kernel.rate(Quantity::seconds(0.1)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn scattering_rate_matches_closed_form() {
        // The momentum average has the closed form
        //   <sinc(p dx)> = exp(-(sigma dx)^2 / 2)
        // for the radial Gaussian weight; the quadrature must reproduce it.
        let sigma = 3.65e-4;
        let kernel = LocalizationKernel::scattering_overlap(
            Quantity::per_second(2.0),
            Quantity::per_meter(sigma),
        )
        .unwrap();
        for z in [0.3, 1.0, 3.0] {
            let dx = z / sigma;
            let got = kernel.rate(Quantity::meters(dx)).unwrap().value();
            let want = 2.0 * (1.0 - (-0.5 * z * z).exp());
            assert!(
                rel_diff(got, want) < 5e-8,
                "z = {z}: got {got:e}, want {want:e}"
            );
        }
    }

    #[test]
    fn scattering_rate_reduces_to_quadratic_limit() {
        let sigma = 2.0;
        let kernel = LocalizationKernel::scattering_overlap(
            Quantity::per_second(3.0),
            Quantity::per_meter(sigma),
        )
        .unwrap();
        let coeff = kernel.quadratic_limit_coefficient();
        assert_eq!(coeff.dim(), Dimension::LOCALIZATION_RATE);
        assert_eq!(coeff.value(), 3.0 * sigma * sigma / 2.0);

        // At sigma dx = 1e-2 the exact ratio to the quadratic law is
        // 1 - (sigma dx)^2/4 + O(z^4) = 0.999975...; quadrature noise is 1e-8.
        let dx = 1e-2 / sigma;
        let got = kernel.rate(Quantity::meters(dx)).unwrap().value();
        let quadratic = coeff.value() * dx * dx;
        let ratio = got / quadratic;
        assert!((ratio - (1.0 - 2.5e-5)).abs() < 1e-7, "ratio = {ratio}");
    }

    #[test]
    fn scattering_rate_saturates_at_event_rate() {
        let kernel = LocalizationKernel::scattering_overlap(
            Quantity::per_second(7.0),
            Quantity::per_meter(1.0),
        )
        .unwrap();
        let got = kernel.rate(Quantity::meters(50.0)).unwrap().value();
        assert!(rel_diff(got, 7.0) < 1e-10, "got {got:e}");
    }

    #[test]
    fn scattering_rate_monotone_in_separation() {
        let kernel = LocalizationKernel::scattering_overlap(
            Quantity::per_second(1.0),
            Quantity::per_meter(1.0),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..40 {
            let a: f64 = rng.random_range(1e-3..10.0f64);
            let b = a * rng.random_range(1.0..3.0);
            let ra = kernel.rate(Quantity::meters(a)).unwrap().value();
            let rb = kernel.rate(Quantity::meters(b)).unwrap().value();
            assert!(
                rb >= ra * (1.0 - 1e-7),
                "rate({b}) = {rb:e} < rate({a}) = {ra:e}"
            );
        }
    }

    #[test]
    fn scattering_edge_cases() {
        let kernel = LocalizationKernel::scattering_overlap(
            Quantity::per_second(5.0),
            Quantity::per_meter(1.0),
        )
        .unwrap();
        assert_eq!(kernel.rate(Quantity::meters(0.0)).unwrap().value(), 0.0);

        let silent = LocalizationKernel::scattering_overlap(
            Quantity::per_second(0.0),
            Quantity::per_meter(1.0),
        )
        .unwrap();
        assert_eq!(silent.rate(Quantity::meters(1.0)).unwrap().value(), 0.0);
    }

    #[test]
    fn scattering_overflow_reports_numeric_error() {
        // sigma so large that p^2 overflows inside the weight: must surface
        // as a numeric failure, not a silent NaN.
        let kernel = LocalizationKernel::scattering_overlap(
            Quantity::per_second(1.0),
            Quantity::per_meter(1e200),
        )
        .unwrap();
        let err = kernel.rate(Quantity::meters(1.0)).unwrap_err();
        assert!(matches!(err, Error::Numeric(_)), "got {err:?}");
    }

    #[test]
    fn one_minus_sinc_is_stable_through_zero() {
        assert_eq!(one_minus_sinc(0.0), 0.0);
        // Series and direct evaluation must agree where both are accurate
        // (truncation of the z^6 series is ~z^6/60480 relative).
        for z in [0.09f64, 0.0999, 0.1001, 0.15] {
            let series = z * z / 6.0 - z.powi(4) / 120.0 + z.powi(6) / 5040.0;
            let got = one_minus_sinc(z);
            assert!(
                rel_diff(got, series) < 1e-9,
                "z = {z}: got {got:e}, series {series:e}"
            );
        }
        // Tiny arguments keep full relative accuracy instead of rounding
        // noise: 1 - sinc(1e-8) = 1.666...e-17 exactly to first order.
        let tiny = one_minus_sinc(1e-8);
        assert!(rel_diff(tiny, 1e-16 / 6.0) < 1e-10, "got {tiny:e}");
        assert!(rel_diff(one_minus_sinc(std::f64::consts::PI), 1.0) < 1e-15);
    }
}
