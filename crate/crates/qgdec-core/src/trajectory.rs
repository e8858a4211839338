//! Branch-separation histories `d(t)` and their geometric factor.
//!
//! A trajectory describes how far apart the two arms of the superposition
//! are at each instant of the sweep. The only functional of `d(t)` the
//! quadratic decay law needs is the integral of `d^2`, reported here in
//! normalized form as the geometric factor
//!
//! ```text
//! kappa = integral d^2(t) dt / (d_max^2 * T)
//! ```
//!
//! with `T` the *half* time of the sweep (launch to apex). Closed-form
//! values: the smoothed ramp gives `kappa = 2/3 + 5/(4 pi^2) ~= 0.7933`, a
//! triangular ramp `2/3`, a constant separation `2` (it holds `d_max` for
//! the full `2T`).
//!
//! Also here: photon-recoil kinematics, which set the apex separation a
//! light-pulse interferometer can reach — `d_max = n (hbar k / m) T` for
//! `n` recoil kicks of wavenumber `k` on an atom of mass `m` drifting for
//! time `T`, e.g. Kovachy et al., Nature 528, 530 (2015).

use std::f64::consts::TAU;

use crate::numeric::integrate;
use crate::units::{Dimension, PhysicalConstants, Quantity};
use crate::{Error, Result};

/// Relative tolerance of the quadrature behind [`Trajectory::geometric_factor`].
pub const GEOMETRIC_FACTOR_REL_TOL: f64 = 1e-10;

/// `sigma * d_max` below which the quadratic small-separation expansion of
/// any kernel is good to a few parts in 1e5.
pub const QUADRATIC_REGIME_THRESHOLD: f64 = 0.01;

/// A branch-separation history on `[start, end]`.
#[derive(Debug, Clone, PartialEq)]
pub enum Trajectory {
    /// Ramp 0 -> d_max -> 0 over `[0, 2T]` with the corners rounded by a
    /// single sine harmonic:
    ///
    /// ```text
    /// d(t) = d_max + (d_max/T) * ((T/2pi) sin(2pi |t-T|/T) - |t-T|)
    /// ```
    ///
    /// Smooth at launch, apex and close; the default model of a
    /// large-momentum-transfer interferometer sweep.
    SmoothedRamp { d_max: Quantity, half_time: Quantity },
    /// Linear ramp 0 -> d_max -> 0 over `[0, 2T]`, corners and all.
    Triangular { d_max: Quantity, half_time: Quantity },
    /// Separation held fixed over `[0, duration]` (a trapped or clamped
    /// superposition).
    Constant {
        separation: Quantity,
        duration: Quantity,
    },
    /// Piecewise-linear interpolation through measured samples
    /// `(times[i] s, separations[i] m)`, `times` strictly increasing.
    Sampled {
        times: Vec<f64>,
        separations: Vec<f64>,
    },
}

/// Result of the quadratic-regime validity test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityCheck {
    /// `sigma * d_max`, dimensionless.
    pub product: f64,
    /// True when `product < QUADRATIC_REGIME_THRESHOLD`.
    pub quadratic_regime: bool,
}

impl Trajectory {
    pub fn smoothed_ramp(d_max: Quantity, half_time: Quantity) -> Result<Self> {
        check_ramp_params(d_max, half_time)?;
        Ok(Trajectory::SmoothedRamp { d_max, half_time })
    }

    pub fn triangular(d_max: Quantity, half_time: Quantity) -> Result<Self> {
        check_ramp_params(d_max, half_time)?;
        Ok(Trajectory::Triangular { d_max, half_time })
    }

    pub fn constant(separation: Quantity, duration: Quantity) -> Result<Self> {
        if separation.dim() != Dimension::LENGTH {
            return Err(Error::Dimension(format!(
                "separation must carry m, got {}",
                separation.dim()
            )));
        }
        if !(separation.value() > 0.0) {
            return Err(Error::InvalidInput(format!(
                "separation must be strictly positive, got {}",
                separation.value()
            )));
        }
        if duration.dim() != Dimension::TIME {
            return Err(Error::Dimension(format!(
                "duration must carry s, got {}",
                duration.dim()
            )));
        }
        if !(duration.value() > 0.0) {
            return Err(Error::InvalidInput(format!(
                "duration must be strictly positive, got {}",
                duration.value()
            )));
        }
        Ok(Trajectory::Constant {
            separation,
            duration,
        })
    }

    /// Samples are `(seconds, metres)`; at least two, times strictly
    /// increasing, separations non-negative, everything finite.
    pub fn sampled(times: Vec<f64>, separations: Vec<f64>) -> Result<Self> {
        if times.len() != separations.len() {
            return Err(Error::InvalidInput(format!(
                "sample arrays differ in length: {} times vs {} separations",
                times.len(),
                separations.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "a sampled trajectory needs at least 2 points, got {}",
                times.len()
            )));
        }
        for pair in times.windows(2) {
            if !(pair[0].is_finite() && pair[1].is_finite() && pair[1] > pair[0]) {
                return Err(Error::InvalidInput(format!(
                    "sample times must be finite and strictly increasing \
                     ({} then {})",
                    pair[0], pair[1]
                )));
            }
        }
        for &d in &separations {
            if !d.is_finite() || d < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "sampled separations must be finite and non-negative, got {d}"
                )));
            }
        }
        Ok(Trajectory::Sampled { times, separations })
    }

    /// First instant of the trajectory's domain, s.
    pub fn start(&self) -> Quantity {
        match self {
            Trajectory::Sampled { times, .. } => Quantity::seconds(times[0]),
            _ => Quantity::seconds(0.0),
        }
    }

    /// Last instant of the trajectory's domain, s.
    pub fn end(&self) -> Quantity {
        match self {
            Trajectory::SmoothedRamp { half_time, .. }
            | Trajectory::Triangular { half_time, .. } => 2.0 * *half_time,
            Trajectory::Constant { duration, .. } => *duration,
            Trajectory::Sampled { times, .. } => {
                Quantity::seconds(*times.last().expect("validated non-empty"))
            }
        }
    }

    pub fn total_duration(&self) -> Quantity {
        self.end() - self.start()
    }

    /// The normalizing half time `T`: stored for the ramps, half the span
    /// otherwise.
    pub fn half_time(&self) -> Quantity {
        match self {
            Trajectory::SmoothedRamp { half_time, .. }
            | Trajectory::Triangular { half_time, .. } => *half_time,
            _ => self.total_duration() / 2.0,
        }
    }

    /// Largest separation the trajectory reaches, m.
    pub fn max_separation(&self) -> Quantity {
        match self {
            Trajectory::SmoothedRamp { d_max, .. } | Trajectory::Triangular { d_max, .. } => {
                *d_max
            }
            Trajectory::Constant { separation, .. } => *separation,
            Trajectory::Sampled { separations, .. } => {
                Quantity::meters(separations.iter().cloned().fold(0.0, f64::max))
            }
        }
    }

    /// Separation at time `t` (s), which must lie in `[start, end]`.
    pub fn separation_at(&self, t: Quantity) -> Result<Quantity> {
        if t.dim() != Dimension::TIME {
            return Err(Error::Dimension(format!(
                "time must carry s, got {}",
                t.dim()
            )));
        }
        let (lo, hi) = (self.start().value(), self.end().value());
        let tv = t.value();
        if !(lo..=hi).contains(&tv) {
            return Err(Error::InvalidInput(format!(
                "time {tv:e} outside trajectory domain [{lo:e}, {hi:e}]"
            )));
        }
        Ok(Quantity::meters(self.separation_si(tv)))
    }

    /// Separation in metres at `t` seconds, assuming `t` is in-domain.
    pub(crate) fn separation_si(&self, t: f64) -> f64 {
        match self {
            Trajectory::SmoothedRamp { d_max, half_time } => {
                let th = half_time.value();
                // u = |t - T| / T in [0, 1]; clamp absorbs rounding at the
                // edges, max(0) absorbs sin(2 pi) != 0 at the endpoints.
                let u = ((t - th).abs() / th).min(1.0);
                (d_max.value() * (1.0 - u + (TAU * u).sin() / TAU)).max(0.0)
            }
            Trajectory::Triangular { d_max, half_time } => {
                let th = half_time.value();
                let u = ((t - th).abs() / th).min(1.0);
                d_max.value() * (1.0 - u)
            }
            Trajectory::Constant { separation, .. } => separation.value(),
            Trajectory::Sampled { times, separations } => {
                match times.binary_search_by(|x| x.total_cmp(&t)) {
                    Ok(i) => separations[i],
                    Err(i) => {
                        // Domain check guarantees times[i-1] < t < times[i].
                        let (t0, t1) = (times[i - 1], times[i]);
                        let (d0, d1) = (separations[i - 1], separations[i]);
                        d0 + (t - t0) / (t1 - t0) * (d1 - d0)
                    }
                }
            }
        }
    }

    /// `kappa = integral d^2 dt / (d_max^2 * T)`, dimensionless.
    ///
    /// Closed-form variants are integrated by adaptive quadrature (split at
    /// the apex, where the ramps have a derivative kink in `d^2`); sampled
    /// trajectories use the exact piecewise formula
    /// `integral = sum h (a^2 + a b + b^2) / 3` per segment. A trajectory
    /// whose separation is identically zero has no geometric weight and
    /// returns 0.
    pub fn geometric_factor(&self) -> Result<f64> {
        let d_max = self.max_separation().value();
        if d_max == 0.0 {
            return Ok(0.0);
        }
        let norm = d_max * d_max * self.half_time().value();
        let integral = match self {
            Trajectory::Sampled { times, separations } => {
                let mut acc = 0.0;
                for i in 1..times.len() {
                    let h = times[i] - times[i - 1];
                    let (a, b) = (separations[i - 1], separations[i]);
                    acc += h * (a * a + a * b + b * b) / 3.0;
                }
                acc
            }
            _ => {
                let f = |t: f64| {
                    let d = self.separation_si(t);
                    d * d
                };
                let apex = match self {
                    Trajectory::Constant { .. } => 0.5 * self.end().value(),
                    _ => self.half_time().value(),
                };
                integrate(f, self.start().value(), apex, GEOMETRIC_FACTOR_REL_TOL)?
                    + integrate(f, apex, self.end().value(), GEOMETRIC_FACTOR_REL_TOL)?
            }
        };
        Ok(integral / norm)
    }

    /// Compare the trajectory's apex separation against a kernel momentum
    /// spread `sigma` (m^-1): the quadratic law is trustworthy only while
    /// `sigma * d_max` stays small.
    pub fn validity_check(&self, sigma: Quantity) -> Result<ValidityCheck> {
        if sigma.dim() != Dimension::WAVENUMBER {
            return Err(Error::Dimension(format!(
                "sigma must carry m^-1, got {}",
                sigma.dim()
            )));
        }
        if !(sigma.value() >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "sigma must be non-negative, got {}",
                sigma.value()
            )));
        }
        let product = (self.max_separation() * sigma).to_dimensionless();
        Ok(ValidityCheck {
            product,
            quadratic_regime: product < QUADRATIC_REGIME_THRESHOLD,
        })
    }
}

fn check_ramp_params(d_max: Quantity, half_time: Quantity) -> Result<()> {
    if d_max.dim() != Dimension::LENGTH {
        return Err(Error::Dimension(format!(
            "d_max must carry m, got {}",
            d_max.dim()
        )));
    }
    if !(d_max.value() > 0.0) {
        return Err(Error::InvalidInput(format!(
            "d_max must be strictly positive, got {}",
            d_max.value()
        )));
    }
    if half_time.dim() != Dimension::TIME {
        return Err(Error::Dimension(format!(
            "half_time must carry s, got {}",
            half_time.dim()
        )));
    }
    if !(half_time.value() > 0.0) {
        return Err(Error::InvalidInput(format!(
            "half_time must be strictly positive, got {}",
            half_time.value()
        )));
    }
    Ok(())
}

/// Photon-recoil parameters of a light-pulse interferometer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoilKinematics {
    /// Number of photon recoils transferred to the moving arm (0 means the
    /// arms never separate).
    pub n_recoils: u32,
    /// Optical wavenumber k = 2 pi / lambda, m^-1.
    pub wavenumber: Quantity,
    /// Mass of the atom, kg.
    pub atom_mass: Quantity,
    /// Drift time from launch to apex, s.
    pub drift_time: Quantity,
}

impl RecoilKinematics {
    pub fn new(
        n_recoils: u32,
        wavenumber: Quantity,
        atom_mass: Quantity,
        drift_time: Quantity,
    ) -> Result<Self> {
        for (name, q, dim) in [
            ("wavenumber", wavenumber, Dimension::WAVENUMBER),
            ("atom_mass", atom_mass, Dimension::MASS),
            ("drift_time", drift_time, Dimension::TIME),
        ] {
            if q.dim() != dim {
                return Err(Error::Dimension(format!(
                    "{name} must carry {dim}, got {}",
                    q.dim()
                )));
            }
            if !(q.value() > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be strictly positive, got {}",
                    q.value()
                )));
            }
        }
        Ok(RecoilKinematics {
            n_recoils,
            wavenumber,
            atom_mass,
            drift_time,
        })
    }

    /// Same, but with the laser quoted by wavelength (m).
    pub fn from_wavelength(
        n_recoils: u32,
        wavelength: Quantity,
        atom_mass: Quantity,
        drift_time: Quantity,
    ) -> Result<Self> {
        if wavelength.dim() != Dimension::LENGTH {
            return Err(Error::Dimension(format!(
                "wavelength must carry m, got {}",
                wavelength.dim()
            )));
        }
        if !(wavelength.value() > 0.0) {
            return Err(Error::InvalidInput(format!(
                "wavelength must be strictly positive, got {}",
                wavelength.value()
            )));
        }
        let k = Quantity::per_meter(TAU / wavelength.value());
        RecoilKinematics::new(n_recoils, k, atom_mass, drift_time)
    }
}

/// Apex separation reached by ballistic drift under `n` photon recoils:
/// `d_max = n * (hbar k / m) * T`, in m.
pub fn max_separation_from_recoils(
    kinematics: &RecoilKinematics,
    constants: &PhysicalConstants,
) -> Quantity {
    let recoil_velocity = constants.hbar * kinematics.wavenumber / kinematics.atom_mass;
    (kinematics.n_recoils as f64 * recoil_velocity * kinematics.drift_time)
        .expect_dim(Dimension::LENGTH, "max_separation_from_recoils")
}
