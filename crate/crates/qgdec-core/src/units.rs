//! Dimension-checked scalars and the shared physical-constant table.
//!
//! Only the three SI base dimensions this model ever produces (mass, length,
//! time) are tracked. Exponents are plain integers, so dimension equality is
//! exact and needs no tolerance. Dimension bookkeeping is an internal
//! correctness net: mixing dimensions in `+`/`-`, or failing an expected-
//! dimension assertion, is a programming error and panics. Fallible
//! validation (`try_new`, `PhysicalConstants::validated`) is reserved for
//! values that arrive from user input.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// SI base-dimension exponents (mass, length, time).
///
/// Forms an abelian group under `*`/`/` (componentwise addition of
/// exponents); `powi` is repeated multiplication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dimension {
    pub mass: i32,
    pub length: i32,
    pub time: i32,
}

impl Dimension {
    /// Dimensionless.
    pub const NONE: Dimension = Dimension::new(0, 0, 0);
    pub const MASS: Dimension = Dimension::new(1, 0, 0);
    pub const LENGTH: Dimension = Dimension::new(0, 1, 0);
    pub const TIME: Dimension = Dimension::new(0, 0, 1);
    /// s^-1 (an event or decay rate).
    pub const RATE: Dimension = Dimension::new(0, 0, -1);
    /// m^-1 (a momentum spread quoted as a wavenumber).
    pub const WAVENUMBER: Dimension = Dimension::new(0, -1, 0);
    /// m s^-1.
    pub const VELOCITY: Dimension = Dimension::new(0, 1, -1);
    /// m^-2 s^-1, the dimension of a localization rate coefficient gamma.
    pub const LOCALIZATION_RATE: Dimension = Dimension::new(0, -2, -1);

    pub const fn new(mass: i32, length: i32, time: i32) -> Self {
        Dimension { mass, length, time }
    }

    pub const fn inverse(self) -> Self {
        Dimension::new(-self.mass, -self.length, -self.time)
    }

    pub const fn powi(self, n: i32) -> Self {
        Dimension::new(self.mass * n, self.length * n, self.time * n)
    }

    pub const fn is_none(self) -> bool {
        self.mass == 0 && self.length == 0 && self.time == 0
    }
}

impl Mul for Dimension {
    type Output = Dimension;
    fn mul(self, rhs: Dimension) -> Dimension {
        Dimension::new(
            self.mass + rhs.mass,
            self.length + rhs.length,
            self.time + rhs.time,
        )
    }
}

impl Div for Dimension {
    type Output = Dimension;
    fn div(self, rhs: Dimension) -> Dimension {
        self * rhs.inverse()
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_none() {
            return write!(f, "1");
        }
        let mut parts = Vec::new();
        for (sym, e) in [("kg", self.mass), ("m", self.length), ("s", self.time)] {
            match e {
                0 => {}
                1 => parts.push(sym.to_string()),
                _ => parts.push(format!("{sym}^{e}")),
            }
        }
        write!(f, "{}", parts.join(" "))
    }
}

/// A finite scalar together with its SI dimensions.
///
/// Construction rejects NaN and infinities: nothing in this model can
/// legitimately overflow f64, so a non-finite value always indicates a bug
/// or an absurd input, and we refuse to let it propagate silently.
/// `+`/`-` panic on mismatched dimensions; `*`/`/` combine them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    value: f64,
    dim: Dimension,
}

impl Quantity {
    /// Panics if `value` is not finite. Use for values the program computed
    /// or hard-coded; use [`Quantity::try_new`] for user input.
    pub fn new(value: f64, dim: Dimension) -> Self {
        assert!(
            value.is_finite(),
            "non-finite quantity: {value} [{dim}]"
        );
        Quantity { value, dim }
    }

    /// Fallible constructor for externally supplied values.
    pub fn try_new(value: f64, dim: Dimension) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::InvalidInput(format!(
                "value must be finite, got {value}"
            )));
        }
        Ok(Quantity { value, dim })
    }

    pub fn dimensionless(value: f64) -> Self {
        Quantity::new(value, Dimension::NONE)
    }

    pub fn kilograms(value: f64) -> Self {
        Quantity::new(value, Dimension::MASS)
    }

    pub fn meters(value: f64) -> Self {
        Quantity::new(value, Dimension::LENGTH)
    }

    pub fn seconds(value: f64) -> Self {
        Quantity::new(value, Dimension::TIME)
    }

    pub fn per_second(value: f64) -> Self {
        Quantity::new(value, Dimension::RATE)
    }

    pub fn per_meter(value: f64) -> Self {
        Quantity::new(value, Dimension::WAVENUMBER)
    }

    /// m^-2 s^-1; the natural unit of the coefficient gamma.
    pub fn localization_rate(value: f64) -> Self {
        Quantity::new(value, Dimension::LOCALIZATION_RATE)
    }

    pub fn value(self) -> f64 {
        self.value
    }

    pub fn dim(self) -> Dimension {
        self.dim
    }

    pub fn abs(self) -> Self {
        Quantity::new(self.value.abs(), self.dim)
    }

    pub fn powi(self, n: i32) -> Self {
        Quantity::new(self.value.powi(n), self.dim.powi(n))
    }

    /// Asserts the quantity has dimension `dim` and returns it unchanged.
    /// Used as a cheap post-condition after formula evaluation.
    #[track_caller]
    pub fn expect_dim(self, dim: Dimension, context: &str) -> Self {
        assert!(
            self.dim == dim,
            "{context}: expected dimension {dim}, got {}",
            self.dim
        );
        self
    }

    /// Extracts the bare value, asserting the quantity is dimensionless.
    #[track_caller]
    pub fn to_dimensionless(self) -> f64 {
        assert!(
            self.dim.is_none(),
            "expected dimensionless quantity, got {}",
            self.dim
        );
        self.value
    }
}

impl Add for Quantity {
    type Output = Quantity;
    #[track_caller]
    fn add(self, rhs: Quantity) -> Quantity {
        assert!(
            self.dim == rhs.dim,
            "dimension mismatch in +: [{}] vs [{}]",
            self.dim,
            rhs.dim
        );
        Quantity::new(self.value + rhs.value, self.dim)
    }
}

impl Sub for Quantity {
    type Output = Quantity;
    #[track_caller]
    fn sub(self, rhs: Quantity) -> Quantity {
        assert!(
            self.dim == rhs.dim,
            "dimension mismatch in -: [{}] vs [{}]",
            self.dim,
            rhs.dim
        );
        Quantity::new(self.value - rhs.value, self.dim)
    }
}

impl Neg for Quantity {
    type Output = Quantity;
    fn neg(self) -> Quantity {
        Quantity::new(-self.value, self.dim)
    }
}

impl Mul for Quantity {
    type Output = Quantity;
    fn mul(self, rhs: Quantity) -> Quantity {
        Quantity::new(self.value * rhs.value, self.dim * rhs.dim)
    }
}

impl Div for Quantity {
    type Output = Quantity;
    fn div(self, rhs: Quantity) -> Quantity {
        Quantity::new(self.value / rhs.value, self.dim / rhs.dim)
    }
}

impl Mul<f64> for Quantity {
    type Output = Quantity;
    fn mul(self, rhs: f64) -> Quantity {
        Quantity::new(self.value * rhs, self.dim)
    }
}

impl Mul<Quantity> for f64 {
    type Output = Quantity;
    fn mul(self, rhs: Quantity) -> Quantity {
        Quantity::new(self * rhs.value, rhs.dim)
    }
}

impl Div<f64> for Quantity {
    type Output = Quantity;
    fn div(self, rhs: f64) -> Quantity {
        Quantity::new(self.value / rhs, self.dim)
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dim.is_none() {
            write!(f, "{:e}", self.value)
        } else {
            write!(f, "{:e} {}", self.value, self.dim)
        }
    }
}

/// CODATA-2018 value of the speed of light, m s^-1 (exact).
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;
/// CODATA-2018 reduced Planck constant, J s (exact).
pub const HBAR: f64 = 1.054_571_817e-34;
/// CODATA-2018 Planck mass, kg.
pub const PLANCK_MASS: f64 = 2.176_434e-8;
/// CODATA-2018 proton mass, kg.
pub const PROTON_MASS: f64 = 1.672_621_92e-27;
/// CODATA-2018 atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_07e-27;

/// The constant table every formula in the crate reads from.
///
/// Defaults are CODATA-2018. `m_nucleon` is the nucleon mass entering the
/// wormhole rate constant; the original estimate says only "nucleon", so we
/// default to the proton mass and leave the entry overridable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Speed of light, m s^-1.
    pub c: Quantity,
    /// Reduced Planck constant, kg m^2 s^-1.
    pub hbar: Quantity,
    /// Planck mass, kg.
    pub m_planck: Quantity,
    /// Nucleon mass entering the rate constant, kg.
    pub m_nucleon: Quantity,
    /// Atomic mass unit, kg (for converting species masses quoted in amu).
    pub amu: Quantity,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants {
            c: Quantity::new(SPEED_OF_LIGHT, Dimension::VELOCITY),
            hbar: Quantity::new(HBAR, Dimension::new(1, 2, -1)),
            m_planck: Quantity::kilograms(PLANCK_MASS),
            m_nucleon: Quantity::kilograms(PROTON_MASS),
            amu: Quantity::kilograms(ATOMIC_MASS_UNIT),
        }
    }
}

impl PhysicalConstants {
    /// CODATA defaults with selected entries overridden, validated for use
    /// with externally supplied numbers. Every entry must be finite and
    /// strictly positive.
    pub fn with_overrides(
        c: Option<f64>,
        hbar: Option<f64>,
        m_planck: Option<f64>,
        m_nucleon: Option<f64>,
    ) -> Result<Self> {
        let mut k = PhysicalConstants::default();
        if let Some(v) = c {
            k.c = Quantity::try_new(v, Dimension::VELOCITY)?;
        }
        if let Some(v) = hbar {
            k.hbar = Quantity::try_new(v, Dimension::new(1, 2, -1))?;
        }
        if let Some(v) = m_planck {
            k.m_planck = Quantity::try_new(v, Dimension::MASS)?;
        }
        if let Some(v) = m_nucleon {
            k.m_nucleon = Quantity::try_new(v, Dimension::MASS)?;
        }
        k.validated()
    }

    fn validated(self) -> Result<Self> {
        for (name, q) in [
            ("c", self.c),
            ("hbar", self.hbar),
            ("m_planck", self.m_planck),
            ("m_nucleon", self.m_nucleon),
            ("amu", self.amu),
        ] {
            if !(q.value() > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be strictly positive, got {}",
                    q.value()
                )));
            }
        }
        Ok(self)
    }
}
