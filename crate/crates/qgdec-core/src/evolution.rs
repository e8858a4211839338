//! Coherence decay under the position-localization master equation
//!
//! ```text
//! d rho / dt = i [rho, H0]
//!              - 1/2 * integral dx dx' D(|x - x'|) |x><x| rho |x'><x'| ...
//! ```
//!
//! whose localization term is diagonal in the position-pair basis: each
//! off-diagonal element decays independently at the kernel rate for its
//! separation, so along a separation history `d(t)`
//!
//! ```text
//! <x|rho(t)|x'> = exp(-integral D(d(t')) dt') * <x|rho(0)|x'> .
//! ```
//!
//! Three routes to that number, used as cross-checks of one another:
//!
//! * [`coherence_decay`] — evaluate the decay exponent by adaptive
//!   quadrature along the trajectory (the reference implementation).
//! * [`moving_branch_evolve`] — step the two-branch superposition through
//!   time, accumulating the instantaneous rate with the midpoint rule.
//! * [`grid_evolve`] — brute force: a density matrix on a fixed position
//!   grid, dephased elementwise by the exact factor `exp(-R_ij dt)` each
//!   step, with an optional Hamiltonian applied as a second-order
//!   (Strang) split step.
//!
//! Fringe contrast in a balanced two-branch interferometer is twice the
//! off-diagonal magnitude, `C = 2 <x|rho|x'>`.

use nalgebra::{Complex, DMatrix, DVector};

use crate::kernels::LocalizationKernel;
use crate::numeric::integrate;
use crate::trajectory::Trajectory;
use crate::units::{Dimension, Quantity};
use crate::{Error, Result};

/// Relative tolerance of the decay-exponent quadrature.
pub const DECAY_INTEGRAL_REL_TOL: f64 = 1e-10;

/// Minimum step count accepted by [`moving_branch_evolve`]; fewer steps
/// make the midpoint accumulation too coarse to be meaningful.
pub const MIN_EVOLVE_STEPS: usize = 100;

/// Hermiticity defect tolerated in a density matrix supplied from outside.
pub const GRID_HERMITICITY_TOL: f64 = 1e-12;

/// Tolerated deviation of the supplied density matrix trace from 1.
pub const GRID_TRACE_TOL: f64 = 1e-12;

/// Eigenvalues of a density matrix may dip this far below zero before we
/// call it non-positive (rounding slack for the eigensolver).
pub const GRID_POSITIVITY_FLOOR: f64 = -1e-10;

/// Hermiticity defect tolerated in a supplied Hamiltonian.
pub const HAMILTONIAN_HERMITICITY_TOL: f64 = 1e-10;

/// Per-step Hermiticity drift at which [`grid_evolve`] aborts: the split
/// step preserves Hermiticity to rounding, so anything past this signals a
/// numerical breakdown rather than physics.
pub const HERMITICITY_DRIFT_TOL: f64 = 1e-9;

/// Stability guard: `dt * max_rate` must not exceed this. The elementwise
/// dephasing factor is exact at any `dt`, but the Strang split against the
/// Hamiltonian is only second order, and a step that damps faster than
/// this has left the regime where that error is controlled.
pub const GRID_STABILITY_LIMIT: f64 = 0.1;

/// Outcome of a coherence-decay computation over one full trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceResult {
    /// Off-diagonal magnitude at launch, in [0, 1/2].
    pub initial_coherence: f64,
    /// Accumulated decay exponent `integral D(d(t)) dt`, >= 0.
    pub exponent: f64,
    /// `initial_coherence * exp(-exponent)`.
    pub final_coherence: f64,
    /// Fringe contrast `2 * final_coherence`.
    pub contrast: f64,
}

impl CoherenceResult {
    pub fn from_exponent(initial_coherence: f64, exponent: f64) -> Self {
        let final_coherence = initial_coherence * (-exponent).exp();
        CoherenceResult {
            initial_coherence,
            exponent,
            final_coherence,
            contrast: 2.0 * final_coherence,
        }
    }
}

/// One record of a stepped evolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSeriesPoint {
    pub time_s: f64,
    pub separation_m: f64,
    /// Decay exponent accumulated up to `time_s`.
    pub exponent: f64,
    pub coherence: f64,
}

fn check_initial_coherence(initial_coherence: f64) -> Result<()> {
    if !initial_coherence.is_finite() || !(0.0..=0.5).contains(&initial_coherence) {
        return Err(Error::InvalidInput(format!(
            "initial coherence must lie in [0, 0.5] (off-diagonal of a \
             balanced two-branch state), got {initial_coherence}"
        )));
    }
    Ok(())
}

/// Decay exponent `integral D(d(t)) dt` over the trajectory's full domain,
/// by adaptive quadrature split at the apex (ramps have a derivative kink
/// there) or per segment (sampled trajectories).
fn decay_exponent(kernel: &LocalizationKernel, trajectory: &Trajectory) -> Result<f64> {
    // Kernel failures inside the integrand surface as NaN, which the
    // quadrature reports as Error::Numeric.
    let rate_at = |t: f64| {
        let d = Quantity::meters(trajectory.separation_si(t));
        match kernel.rate(d) {
            Ok(r) => r.value(),
            Err(_) => f64::NAN,
        }
    };
    match trajectory {
        Trajectory::Sampled { times, .. } => {
            let mut acc = 0.0;
            for pair in times.windows(2) {
                acc += integrate(&rate_at, pair[0], pair[1], DECAY_INTEGRAL_REL_TOL)?;
            }
            Ok(acc)
        }
        _ => {
            let (a, b) = (trajectory.start().value(), trajectory.end().value());
            let apex = 0.5 * (a + b);
            Ok(integrate(&rate_at, a, apex, DECAY_INTEGRAL_REL_TOL)?
                + integrate(&rate_at, apex, b, DECAY_INTEGRAL_REL_TOL)?)
        }
    }
}

/// Closed-path evaluation of the coherence surviving a full trajectory.
pub fn coherence_decay(
    kernel: &LocalizationKernel,
    trajectory: &Trajectory,
    initial_coherence: f64,
) -> Result<CoherenceResult> {
    check_initial_coherence(initial_coherence)?;
    let exponent = decay_exponent(kernel, trajectory)?;
    Ok(CoherenceResult::from_exponent(initial_coherence, exponent))
}

/// Stepped evolution of the two-branch coherence: `steps` uniform steps
/// across the trajectory domain, rate sampled at each midpoint. Returns
/// `steps + 1` points; the first carries the initial state.
pub fn coherence_time_series(
    kernel: &LocalizationKernel,
    trajectory: &Trajectory,
    initial_coherence: f64,
    steps: usize,
) -> Result<Vec<TimeSeriesPoint>> {
    check_initial_coherence(initial_coherence)?;
    if steps == 0 {
        return Err(Error::InvalidInput("steps must be at least 1".into()));
    }
    let t0 = trajectory.start().value();
    let t1 = trajectory.end().value();
    let dt = (t1 - t0) / steps as f64;

    let mut out = Vec::with_capacity(steps + 1);
    out.push(TimeSeriesPoint {
        time_s: t0,
        separation_m: trajectory.separation_si(t0),
        exponent: 0.0,
        coherence: initial_coherence,
    });
    let mut exponent = 0.0;
    for k in 0..steps {
        let mid = t0 + (k as f64 + 0.5) * dt;
        let rate = kernel
            .rate(Quantity::meters(trajectory.separation_si(mid)))?
            .value();
        exponent += rate * dt;
        // Land the last point exactly on the domain edge.
        let t = if k + 1 == steps {
            t1
        } else {
            t0 + (k + 1) as f64 * dt
        };
        out.push(TimeSeriesPoint {
            time_s: t,
            separation_m: trajectory.separation_si(t),
            exponent,
            coherence: initial_coherence * (-exponent).exp(),
        });
    }
    Ok(out)
}

/// Stepped counterpart of [`coherence_decay`]; `steps` must be at least
/// [`MIN_EVOLVE_STEPS`]. Second-order accurate in the step size.
pub fn moving_branch_evolve(
    kernel: &LocalizationKernel,
    trajectory: &Trajectory,
    initial_coherence: f64,
    steps: usize,
) -> Result<CoherenceResult> {
    if steps < MIN_EVOLVE_STEPS {
        return Err(Error::InvalidInput(format!(
            "moving-branch evolution needs at least {MIN_EVOLVE_STEPS} steps, got {steps}"
        )));
    }
    let series = coherence_time_series(kernel, trajectory, initial_coherence, steps)?;
    let last = series.last().expect("series is never empty");
    Ok(CoherenceResult::from_exponent(
        initial_coherence,
        last.exponent,
    ))
}

/// A density matrix sampled on a fixed grid of positions.
///
/// Invariants enforced at construction: positions finite and as many as
/// matrix rows; the matrix Hermitian to [`GRID_HERMITICITY_TOL`], unit
/// trace to [`GRID_TRACE_TOL`], and positive semidefinite down to
/// [`GRID_POSITIVITY_FLOOR`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrixGrid {
    positions: Vec<f64>,
    rho: DMatrix<Complex<f64>>,
    time_s: f64,
}

impl DensityMatrixGrid {
    pub fn new(positions: Vec<f64>, rho: DMatrix<Complex<f64>>, time: Quantity) -> Result<Self> {
        if time.dim() != Dimension::TIME {
            return Err(Error::Dimension(format!(
                "time must carry s, got {}",
                time.dim()
            )));
        }
        if positions.is_empty() {
            return Err(Error::InvalidInput("grid needs at least one position".into()));
        }
        if positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("grid positions must be finite".into()));
        }
        if rho.nrows() != positions.len() || rho.ncols() != positions.len() {
            return Err(Error::InvalidInput(format!(
                "density matrix is {}x{} but the grid has {} positions",
                rho.nrows(),
                rho.ncols(),
                positions.len()
            )));
        }
        let defect = hermiticity_defect(&rho);
        if defect > GRID_HERMITICITY_TOL {
            return Err(Error::InvalidInput(format!(
                "density matrix is not Hermitian (defect {defect:e})"
            )));
        }
        let trace_error = (rho.trace() - Complex::new(1.0, 0.0)).norm();
        if trace_error > GRID_TRACE_TOL {
            return Err(Error::InvalidInput(format!(
                "density matrix trace deviates from 1 by {trace_error:e}"
            )));
        }
        let min_eig = min_eigenvalue(&rho);
        if min_eig < GRID_POSITIVITY_FLOOR {
            return Err(Error::InvalidInput(format!(
                "density matrix is not positive semidefinite \
                 (minimum eigenvalue {min_eig:e})"
            )));
        }
        Ok(DensityMatrixGrid {
            positions,
            rho,
            time_s: time.value(),
        })
    }

    /// Balanced superposition of two branches `separation` apart with
    /// off-diagonal magnitude `coherence` (in [0, 1/2], which is exactly
    /// the positivity range).
    pub fn two_branch(separation: Quantity, coherence: f64) -> Result<Self> {
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
        check_initial_coherence(coherence)?;
        let c = Complex::new(coherence, 0.0);
        let half = Complex::new(0.5, 0.0);
        let rho = DMatrix::from_row_slice(2, 2, &[half, c, c, half]);
        DensityMatrixGrid::new(vec![0.0, separation.value()], rho, Quantity::seconds(0.0))
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn rho(&self) -> &DMatrix<Complex<f64>> {
        &self.rho
    }

    pub fn element(&self, i: usize, j: usize) -> Complex<f64> {
        self.rho[(i, j)]
    }

    pub fn time(&self) -> Quantity {
        Quantity::seconds(self.time_s)
    }

    pub fn trace(&self) -> Complex<f64> {
        self.rho.trace()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.rho)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.rho)
    }
}

fn hermiticity_defect(m: &DMatrix<Complex<f64>>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn min_eigenvalue(m: &DMatrix<Complex<f64>>) -> f64 {
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Elementwise (Schur) product with a real damping matrix.
fn schur_damp(rho: &mut DMatrix<Complex<f64>>, damp: &DMatrix<f64>) {
    for j in 0..rho.ncols() {
        for i in 0..rho.nrows() {
            rho[(i, j)] *= damp[(i, j)];
        }
    }
}

/// Brute-force evolution of a gridded density matrix for `steps` steps of
/// length `dt`.
///
/// Each step applies the exact dephasing factor `exp(-D(|x_i - x_j|) dt)`
/// elementwise — the damping matrix is a Gaussian-kernel Gram-type matrix,
/// so the Schur product preserves positivity exactly — and, when a
/// Hamiltonian `H` (entries in rad s^-1, applied as `exp(-i H dt)`) is
/// supplied, sandwiches the unitary between two half-step dampings
/// (Strang splitting, second order in `dt`).
pub fn grid_evolve(
    grid: &DensityMatrixGrid,
    kernel: &LocalizationKernel,
    hamiltonian: Option<&DMatrix<Complex<f64>>>,
    dt: Quantity,
    steps: usize,
) -> Result<DensityMatrixGrid> {
    if dt.dim() != Dimension::TIME {
        return Err(Error::Dimension(format!(
            "dt must carry s, got {}",
            dt.dim()
        )));
    }
    let dt_s = dt.value();
    if !(dt_s > 0.0) {
        return Err(Error::InvalidInput(format!(
            "dt must be strictly positive, got {dt_s}"
        )));
    }

    let n = grid.len();
    let mut rates = DMatrix::<f64>::zeros(n, n);
    let mut max_rate = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let sep = (grid.positions[i] - grid.positions[j]).abs();
            let r = kernel.rate(Quantity::meters(sep))?.value();
            rates[(i, j)] = r;
            rates[(j, i)] = r;
            max_rate = max_rate.max(r);
        }
    }
    if dt_s * max_rate > GRID_STABILITY_LIMIT {
        return Err(Error::InvalidInput(format!(
            "dt * max kernel rate = {:e} exceeds the stability limit {GRID_STABILITY_LIMIT}; \
             shrink dt below {:e} s",
            dt_s * max_rate,
            GRID_STABILITY_LIMIT / max_rate
        )));
    }

    let propagator = match hamiltonian {
        Some(h) => {
            if h.nrows() != n || h.ncols() != n {
                return Err(Error::InvalidInput(format!(
                    "hamiltonian is {}x{} but the grid has {n} positions",
                    h.nrows(),
                    h.ncols()
                )));
            }
            let defect = hermiticity_defect(h);
            if defect > HAMILTONIAN_HERMITICITY_TOL {
                return Err(Error::InvalidInput(format!(
                    "hamiltonian is not Hermitian (defect {defect:e})"
                )));
            }
            // U = exp(-i H dt) through the eigendecomposition H = V L V^H.
            let eig = h.clone().symmetric_eigen();
            let phases = DVector::from_iterator(
                n,
                eig.eigenvalues
                    .iter()
                    .map(|&w| Complex::from_polar(1.0, -w * dt_s)),
            );
            let u = &eig.eigenvectors
                * DMatrix::from_diagonal(&phases)
                * eig.eigenvectors.adjoint();
            let u_dag = u.adjoint();
            Some((u, u_dag))
        }
        None => None,
    };
    let damp_full = rates.map(|r| (-r * dt_s).exp());
    let damp_half = rates.map(|r| (-0.5 * r * dt_s).exp());

    let mut rho = grid.rho.clone();
    for step in 0..steps {
        match &propagator {
            Some((u, u_dag)) => {
                schur_damp(&mut rho, &damp_half);
                rho = u * &rho * u_dag;
                schur_damp(&mut rho, &damp_half);
            }
            None => schur_damp(&mut rho, &damp_full),
        }
        let drift = hermiticity_defect(&rho);
        if drift > HERMITICITY_DRIFT_TOL {
            return Err(Error::Numeric(format!(
                "Hermiticity drift {drift:e} after step {} exceeds {HERMITICITY_DRIFT_TOL:e}",
                step + 1
            )));
        }
    }

    let min_eig = min_eigenvalue(&rho);
    if min_eig < GRID_POSITIVITY_FLOOR {
        return Err(Error::Numeric(format!(
            "evolved density matrix lost positivity (minimum eigenvalue {min_eig:e})"
        )));
    }
    Ok(DensityMatrixGrid {
        positions: grid.positions.clone(),
        rho,
        time_s: grid.time_s + dt_s * steps as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{gamma_qg, EllisParameters};
    use crate::units::PhysicalConstants;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rel_diff(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    fn quadratic(gamma: f64, prefactor: f64) -> LocalizationKernel {
        LocalizationKernel::quadratic(Quantity::localization_rate(gamma), prefactor).unwrap()
    }

    fn rb87_kernel() -> LocalizationKernel {
        let params =
            EllisParameters::for_species_amu(87.0, 1.0, PhysicalConstants::default()).unwrap();
        LocalizationKernel::quadratic(gamma_qg(&params), 1.0).unwrap()
    }

    fn sweep() -> Trajectory {
        Trajectory::smoothed_ramp(Quantity::meters(0.54), Quantity::seconds(1.04)).unwrap()
    }

    // Hand-evaluated: gamma_QG(87 amu) * kappa * d_max^2 * T with
    // kappa = 2/3 + 5/(4 pi^2), d_max = 0.54 m, T = 1.04 s.
    const EXPONENT_87AMU_SWEEP: f64 = 26.255114049592775;
    // Same for a 1 amu system: scales by (1/87)^2.
    const EXPONENT_1AMU_SWEEP: f64 = 0.0034687691966696756;

    #[test]
    fn coherence_decay_matches_hand_evaluation() {
        let r = coherence_decay(&rb87_kernel(), &sweep(), 0.5).unwrap();
        assert!(
            rel_diff(r.exponent, EXPONENT_87AMU_SWEEP) < 1e-10,
            "exponent = {:.15}",
            r.exponent
        );
        assert_eq!(r.final_coherence, 0.5 * (-r.exponent).exp());
        assert_eq!(r.contrast, 2.0 * r.final_coherence);
        assert!(
            r.contrast > 1e-12 && r.contrast < 1e-11,
            "contrast = {:e}",
            r.contrast
        );
    }

    #[test]
    fn coherence_decay_light_species_stays_coherent() {
        let params =
            EllisParameters::for_species_amu(1.0, 1.0, PhysicalConstants::default()).unwrap();
        let kernel = LocalizationKernel::quadratic(gamma_qg(&params), 1.0).unwrap();
        let r = coherence_decay(&kernel, &sweep(), 0.5).unwrap();
        assert!(
            rel_diff(r.exponent, EXPONENT_1AMU_SWEEP) < 1e-10,
            "exponent = {:e}",
            r.exponent
        );
        assert!(
            rel_diff(r.contrast, 0.99653724003298196) < 1e-10,
            "contrast = {:.17}",
            r.contrast
        );
    }

    #[test]
    fn coherence_decay_constant_trajectory_analytic() {
        let tr = Trajectory::constant(Quantity::meters(3.0), Quantity::seconds(5.0)).unwrap();
        let r = coherence_decay(&quadratic(2.0, 0.5), &tr, 0.4).unwrap();
        // exponent = (1/2) * 2 * 3^2 * 5 = 45.
        assert!(rel_diff(r.exponent, 45.0) < 1e-12, "exponent = {}", r.exponent);
        assert_eq!(r.initial_coherence, 0.4);
    }

    #[test]
    fn zero_gamma_preserves_coherence_exactly() {
        let r = coherence_decay(&quadratic(0.0, 1.0), &sweep(), 0.37).unwrap();
        assert_eq!(r.exponent, 0.0);
        assert_eq!(r.final_coherence, 0.37);
        assert_eq!(r.contrast, 0.74);
    }

    #[test]
    fn initial_coherence_domain_is_enforced() {
        for bad in [-0.1, 0.51, f64::NAN] {
            assert!(matches!(
                coherence_decay(&rb87_kernel(), &sweep(), bad),
                Err(Error::InvalidInput(_))
            ));
        }
    }

    #[test]
    fn moving_branch_requires_minimum_steps() {
        let err = moving_branch_evolve(&rb87_kernel(), &sweep(), 0.5, 99).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
        assert!(moving_branch_evolve(&rb87_kernel(), &sweep(), 0.5, 100).is_ok());
    }

    #[test]
    fn moving_branch_converges_to_closed_form() {
        let closed = coherence_decay(&rb87_kernel(), &sweep(), 0.5).unwrap();
        let stepped = moving_branch_evolve(&rb87_kernel(), &sweep(), 0.5, 20_000).unwrap();
        assert!(
            rel_diff(stepped.exponent, closed.exponent) < 5e-7,
            "stepped = {:.12}, closed = {:.12}",
            stepped.exponent,
            closed.exponent
        );
        // Midpoint rule is second order: quartering the step size should
        // cut the error by roughly sixteen.
        let coarse = moving_branch_evolve(&rb87_kernel(), &sweep(), 0.5, 500).unwrap();
        let fine = moving_branch_evolve(&rb87_kernel(), &sweep(), 0.5, 2_000).unwrap();
        let e_coarse = (coarse.exponent - closed.exponent).abs();
        let e_fine = (fine.exponent - closed.exponent).abs();
        assert!(
            e_fine < e_coarse / 8.0,
            "error {e_coarse:e} -> {e_fine:e} is not second order"
        );
    }

    #[test]
    fn time_series_shape_and_monotonicity() {
        let series = coherence_time_series(&rb87_kernel(), &sweep(), 0.5, 500).unwrap();
        assert_eq!(series.len(), 501);
        assert_eq!(series[0].time_s, 0.0);
        assert_eq!(series[0].coherence, 0.5);
        assert_eq!(series[0].exponent, 0.0);
        assert_eq!(series.last().unwrap().time_s, 2.08);
        assert_eq!(series.last().unwrap().separation_m, 0.0);
        for pair in series.windows(2) {
            assert!(pair[1].coherence <= pair[0].coherence);
            assert!(pair[1].exponent >= pair[0].exponent);
            assert!(pair[1].time_s > pair[0].time_s);
        }
    }

    #[test]
    fn two_branch_grid_is_valid() {
        let g = DensityMatrixGrid::two_branch(Quantity::meters(0.54), 0.5).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.positions(), &[0.0, 0.54]);
        assert_eq!(g.element(0, 1).re, 0.5);
        assert_eq!(g.trace().re, 1.0);
        assert!(g.min_eigenvalue() >= -1e-15);
    }

    #[test]
    fn grid_validation_rejects_malformed_states() {
        let t = Quantity::seconds(0.0);
        let half = Complex::new(0.5, 0.0);

        // Non-Hermitian.
        let rho = DMatrix::from_row_slice(
            2,
            2,
            &[half, Complex::new(0.1, 0.0), Complex::new(0.3, 0.0), half],
        );
        assert!(matches!(
            DensityMatrixGrid::new(vec![0.0, 1.0], rho, t),
            Err(Error::InvalidInput(_))
        ));

        // Trace != 1.
        let rho = DMatrix::from_diagonal(&DVector::from_vec(vec![half, half * 0.8]));
        assert!(matches!(
            DensityMatrixGrid::new(vec![0.0, 1.0], rho, t),
            Err(Error::InvalidInput(_))
        ));

        // Hermitian, unit trace, but indefinite (coherence > 1/2).
        let c = Complex::new(0.6, 0.0);
        let rho = DMatrix::from_row_slice(2, 2, &[half, c, c, half]);
        assert!(matches!(
            DensityMatrixGrid::new(vec![0.0, 1.0], rho, t),
            Err(Error::InvalidInput(_))
        ));

        // Dimension mismatch with the position grid.
        let rho = DMatrix::from_diagonal(&DVector::from_vec(vec![half, half]));
        assert!(matches!(
            DensityMatrixGrid::new(vec![0.0, 1.0, 2.0], rho, t),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn grid_evolution_matches_closed_form_dephasing() {
        // Two branches 0.3 m apart, gamma = 2: rate = 0.18 s^-1.
        let kernel = quadratic(2.0, 1.0);
        let grid = DensityMatrixGrid::two_branch(Quantity::meters(0.3), 0.5).unwrap();
        let evolved =
            grid_evolve(&grid, &kernel, None, Quantity::seconds(0.5), 10).unwrap();
        let closed = 0.5 * (-2.0 * 0.3 * 0.3 * 5.0f64).exp();
        assert!(rel_diff(evolved.element(0, 1).re, closed) < 1e-13);
        assert_eq!(evolved.element(0, 1).im, 0.0);
        // Populations are untouched by pure dephasing.
        assert_eq!(evolved.element(0, 0).re, 0.5);
        assert_eq!(evolved.element(1, 1).re, 0.5);
        assert_eq!(evolved.time().value(), 5.0);

        // And it agrees with coherence_decay over a constant trajectory.
        let tr = Trajectory::constant(Quantity::meters(0.3), Quantity::seconds(5.0)).unwrap();
        let reference = coherence_decay(&kernel, &tr, 0.5).unwrap();
        assert!(rel_diff(evolved.element(0, 1).re, reference.final_coherence) < 1e-12);
    }

    #[test]
    fn grid_evolution_stability_guard() {
        let kernel = quadratic(2.0, 1.0); // rate = 0.18 at 0.3 m
        let grid = DensityMatrixGrid::two_branch(Quantity::meters(0.3), 0.5).unwrap();
        let err =
            grid_evolve(&grid, &kernel, None, Quantity::seconds(0.6), 1).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)), "got {err:?}");
    }

    #[test]
    fn grid_evolution_with_diagonal_hamiltonian() {
        // H = diag(0, w): the coherence picks up phase w*t while its
        // magnitude follows the dephasing law exactly (the split is exact
        // for commuting pieces).
        let w = 1.3;
        let kernel = quadratic(2.0, 1.0);
        let grid = DensityMatrixGrid::two_branch(Quantity::meters(0.3), 0.5).unwrap();
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![
            Complex::new(0.0, 0.0),
            Complex::new(w, 0.0),
        ]));
        let evolved =
            grid_evolve(&grid, &kernel, Some(&h), Quantity::seconds(0.1), 50).unwrap();
        let magnitude = 0.5 * (-2.0 * 0.3 * 0.3 * 5.0f64).exp();
        let phase = w * 5.0;
        let c = evolved.element(0, 1);
        assert!(rel_diff(c.re, magnitude * phase.cos()) < 1e-11, "re = {}", c.re);
        assert!(rel_diff(c.im, magnitude * phase.sin()) < 1e-11, "im = {}", c.im);
        assert!(rel_diff(c.norm(), magnitude) < 1e-12);
    }

    #[test]
    fn grid_evolution_rejects_bad_hamiltonians() {
        let kernel = quadratic(2.0, 1.0);
        let grid = DensityMatrixGrid::two_branch(Quantity::meters(0.3), 0.5).unwrap();

        let wrong_size = DMatrix::from_diagonal(&DVector::from_vec(vec![Complex::new(
            1.0, 0.0,
        )]));
        assert!(matches!(
            grid_evolve(&grid, &kernel, Some(&wrong_size), Quantity::seconds(0.1), 1),
            Err(Error::InvalidInput(_))
        ));

        let non_hermitian = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex::new(0.0, 0.0),
                Complex::new(1.0, 0.0),
                Complex::new(0.0, 0.0),
                Complex::new(0.0, 0.0),
            ],
        );
        assert!(matches!(
            grid_evolve(&grid, &kernel, Some(&non_hermitian), Quantity::seconds(0.1), 1),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn grid_evolution_preserves_state_invariants() {
        // Random mixed states on random grids stay Hermitian, unit-trace
        // and positive under evolution with a generic Hamiltonian.
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..3 {
            let n = 5;
            let a = DMatrix::from_fn(n, n, |_, _| {
                Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let mut rho = &a * a.adjoint();
            let tr = rho.trace().re;
            rho /= Complex::new(tr, 0.0);
            // Symmetrize away the last-bit rounding from the product.
            let rho = (rho.clone() + rho.adjoint()) * Complex::new(0.5, 0.0);

            let mut positions: Vec<f64> =
                (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            positions.sort_by(f64::total_cmp);
            let grid =
                DensityMatrixGrid::new(positions, rho, Quantity::seconds(0.0)).unwrap();

            let h0 = DMatrix::from_fn(n, n, |i, j| {
                Complex::new(
                    rng.random_range(-1.0..1.0f64),
                    if i == j { 0.0 } else { rng.random_range(-1.0..1.0) },
                )
            });
            let h = (h0.clone() + h0.adjoint()) * Complex::new(0.5, 0.0);

            let kernel = LocalizationKernel::scattering_overlap(
                Quantity::per_second(0.5),
                Quantity::per_meter(1.0),
            )
            .unwrap();
            let evolved =
                grid_evolve(&grid, &kernel, Some(&h), Quantity::seconds(0.1), 20).unwrap();
            assert!(evolved.hermiticity_defect() <= 1e-9);
            assert!((evolved.trace() - Complex::new(1.0, 0.0)).norm() < 1e-10);
            assert!(evolved.min_eigenvalue() >= -1e-10);
        }
    }

    #[test]
    fn grid_off_diagonals_decay_faster_with_distance() {
        // On a wider grid, the farther-apart pair must lose coherence
        // faster (Gaussian-kernel monotonicity).
        let kernel = quadratic(1.0, 1.0);
        let third = Complex::new(1.0 / 3.0, 0.0);
        let off = Complex::new(0.2, 0.0);
        let rho = DMatrix::from_row_slice(
            3,
            3,
            &[third, off, off, off, third, off, off, off, third],
        );
        let grid =
            DensityMatrixGrid::new(vec![0.0, 0.2, 0.5], rho, Quantity::seconds(0.0)).unwrap();
        let evolved =
            grid_evolve(&grid, &kernel, None, Quantity::seconds(0.2), 25).unwrap();
        let c01 = evolved.element(0, 1).re;
        let c02 = evolved.element(0, 2).re;
        let c12 = evolved.element(1, 2).re;
        assert!(c02 < c12 && c12 < c01, "c01={c01} c12={c12} c02={c02}");
        // Each element follows its own exact exponential.
        let t = 5.0;
        assert!(rel_diff(c01, 0.2 * (-0.04f64 * t).exp()) < 1e-12);
        assert!(rel_diff(c02, 0.2 * (-0.25f64 * t).exp()) < 1e-12);
        assert!(rel_diff(c12, 0.2 * (-0.09f64 * t).exp()) < 1e-12);
    }
}
