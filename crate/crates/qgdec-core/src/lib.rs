//! Decoherence from position localization in matter-wave interferometers.
//!
//! The model: spatial superpositions lose coherence at a rate that grows
//! with the branch separation. For a localization rate coefficient
//! `gamma` (units m^-2 s^-1) and separation history `d(t)`, the off-diagonal
//! density-matrix element decays as
//!
//! ```text
//! <x|rho(t)|x'>  =  exp(-gamma * integral d^2(t') dt') * <x|rho(0)|x'>
//! ```
//!
//! in the quadratic (small-separation) regime, with a more general
//! scattering-overlap kernel available when the separation becomes
//! comparable to the inverse momentum spread of the environment.
//!
//! Module map:
//!
//! * [`units`] — dimension-checked scalars and the CODATA constant table.
//! * [`numeric`] — adaptive Gauss-Kronrod quadrature and bisection.
//! * [`kernels`] — localization-rate models: the quadratic law with the
//!   Ellis et al. wormhole rate constant, and the scattering-overlap form.
//! * [`trajectory`] — branch-separation histories `d(t)`, their geometric
//!   factor, and photon-recoil kinematics.
//! * [`evolution`] — coherence decay along a trajectory, plus a brute-force
//!   position-grid density-matrix integrator used as a cross-check.
//! * [`bounds`] — inversion of a measured fringe contrast into an upper
//!   bound on `gamma` and comparison against the model prediction.

pub mod bounds;
pub mod evolution;
pub mod kernels;
pub mod numeric;
pub mod trajectory;
pub mod units;

/// Error type shared by the whole crate.
///
/// The split matters to callers: `InvalidInput` and `Dimension` mean the
/// request itself was malformed (a caller/config problem), while `Numeric`
/// means a well-posed computation failed to converge or left the
/// representable range (a runtime problem).
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// A parameter was outside its documented domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A quantity carried the wrong physical dimension for the operation.
    #[error("dimension error: {0}")]
    Dimension(String),
    /// A numerical routine failed: non-finite intermediate, no convergence,
    /// or a stability guard tripped.
    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
