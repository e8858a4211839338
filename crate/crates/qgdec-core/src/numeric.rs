//! Self-contained numerical kernels: adaptive Gauss-Kronrod quadrature and
//! bracketing bisection.
//!
//! The integrator is the classic 7-15 Gauss-Kronrod pair with QUADPACK's
//! error rescaling, driven by a worst-panel-first refinement loop. That is
//! plenty for the integrands this crate produces (smooth, non-negative,
//! at worst with one corner at a trajectory apex); it is not a general
//! purpose library. Integrands are plain `f64 -> f64` closures: a fallible
//! inner computation should return NaN, which the panel evaluator reports
//! as a numeric error instead of letting it poison the sum.

use crate::{Error, Result};

/// Abscissae of the 15-point Kronrod rule on [-1, 1] (positive half,
/// descending). Odd indices plus the centre are the embedded 7-point Gauss
/// nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

/// 7-point Gauss weights; `WG[i]` pairs with `XGK[2i + 1]`, the last with
/// the centre node.
const WG: [f64; 4] = [
    0.129_484_966_168_869_69,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Hard cap on refinement. The smooth integrands here converge in well
/// under a hundred panels; hitting the cap means the integral is divergent
/// or the tolerance unreachable, and we report failure rather than stall.
const MAX_PANELS: usize = 2000;

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    integral: f64,
    error: f64,
}

/// QUADPACK's empirical error estimate: damp the raw Gauss/Kronrod
/// difference against the scale of variation of the integrand, and floor it
/// at the rounding level of the computed integral.
fn rescale_error(raw: f64, result_abs: f64, result_asc: f64) -> f64 {
    let mut err = raw.abs();
    if result_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / result_asc).powf(1.5);
        err = if scale < 1.0 { result_asc * scale } else { result_asc };
    }
    if result_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * result_abs);
    }
    err
}

/// One 15-point Kronrod evaluation over [a, b].
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    let mut below = [0.0f64; 7];
    let mut above = [0.0f64; 7];
    for j in 0..7 {
        below[j] = f(center - half * XGK[j]);
        above[j] = f(center + half * XGK[j]);
    }

    let mut result_kronrod = WGK[7] * fc;
    let mut result_abs = WGK[7] * fc.abs();
    let mut result_gauss = WG[3] * fc;
    for j in 0..7 {
        let pair = below[j] + above[j];
        result_kronrod += WGK[j] * pair;
        result_abs += WGK[j] * (below[j].abs() + above[j].abs());
        if j % 2 == 1 {
            result_gauss += WG[j / 2] * pair;
        }
    }

    let mean = 0.5 * result_kronrod;
    let mut result_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        result_asc += WGK[j] * ((below[j] - mean).abs() + (above[j] - mean).abs());
    }

    let integral = result_kronrod * half;
    if !integral.is_finite() {
        return Err(Error::Numeric(format!(
            "non-finite integrand over [{a:e}, {b:e}]"
        )));
    }
    let raw = (result_kronrod - result_gauss) * half;
    let error = rescale_error(raw, result_abs * half.abs(), result_asc * half.abs());

    Ok(Panel {
        a,
        b,
        integral,
        error,
    })
}

/// Adaptive quadrature of `f` over [a, b] to relative tolerance `rel_tol`.
///
/// Splits the panel with the largest error estimate until the summed error
/// drops below `rel_tol * |integral|`. Requires `a <= b`; returns 0 for an
/// empty interval. Fails with [`Error::Numeric`] on a non-finite integrand
/// or when `MAX_PANELS` panels do not reach the tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    assert!(
        a.is_finite() && b.is_finite() && a <= b,
        "integration interval must be finite with a <= b, got [{a}, {b}]"
    );
    assert!(rel_tol > 0.0, "rel_tol must be positive, got {rel_tol}");
    if a == b {
        return Ok(0.0);
    }

    let mut panels = vec![gk15(&f, a, b)?];
    loop {
        let total: f64 = panels.iter().map(|p| p.integral).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        // The tiny absolute floor lets an identically-zero integrand
        // terminate; it is far below any scale this crate integrates.
        if error <= rel_tol * total.abs() + 1e-300 {
            return Ok(total);
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::Numeric(format!(
                "quadrature over [{a:e}, {b:e}] did not reach relative tolerance {rel_tol:e} \
                 in {MAX_PANELS} panels (error estimate {error:e} on integral {total:e})"
            )));
        }

        let worst = panels
            .iter()
            .enumerate()
            .max_by(|(_, p), (_, q)| p.error.total_cmp(&q.error))
            .map(|(i, _)| i)
            .expect("panel list is never empty");
        let Panel { a: pa, b: pb, .. } = panels[worst];
        let mid = 0.5 * (pa + pb);
        if mid <= pa || mid >= pb {
            // Interval no longer splittable in f64; accept what we have.
            return Ok(total);
        }
        panels[worst] = gk15(&f, pa, mid)?;
        panels.push(gk15(&f, mid, pb)?);
    }
}

/// Maximum bisection iterations; 200 halvings exhaust f64 resolution on any
/// bracket, so hitting this is a logic error reported as non-convergence.
const MAX_BISECT_ITER: usize = 200;

/// Root of `f` on the bracket [lo, hi] by bisection, to relative tolerance
/// `rel_tol` on the bracket width.
///
/// `f(lo)` and `f(hi)` must have opposite (or zero) signs. The closure is
/// fallible so that callers whose residual involves quadrature can surface
/// those failures directly.
pub fn bisect<F: Fn(f64) -> Result<f64>>(
    f: F,
    lo: f64,
    hi: f64,
    rel_tol: f64,
) -> Result<f64> {
    assert!(
        lo.is_finite() && hi.is_finite() && lo < hi,
        "bisection bracket must be finite with lo < hi, got [{lo}, {hi}]"
    );
    assert!(rel_tol > 0.0, "rel_tol must be positive, got {rel_tol}");

    let f_lo = f(lo)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    let f_hi = f(hi)?;
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::InvalidInput(format!(
            "bisection bracket [{lo:e}, {hi:e}] does not straddle a root \
             (f(lo) = {f_lo:e}, f(hi) = {f_hi:e})"
        )));
    }

    let (mut lo, mut hi) = (lo, hi);
    let mut f_lo = f_lo;
    for _ in 0..MAX_BISECT_ITER {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        let scale = mid.abs().max(f64::MIN_POSITIVE);
        if hi - lo <= rel_tol * scale {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(Error::Numeric(format!(
        "bisection did not converge to relative tolerance {rel_tol:e} \
         in {MAX_BISECT_ITER} iterations"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn kronrod_weights_integrate_constants() {
        // Weights on [-1, 1] must sum to 2 at the rule's own precision.
        let wk: f64 = WGK[7] + 2.0 * WGK[..7].iter().sum::<f64>();
        let wg: f64 = WG[3] + 2.0 * WG[..3].iter().sum::<f64>();
        assert!((wk - 2.0).abs() < 1e-15, "kronrod weight sum {wk}");
        assert!((wg - 2.0).abs() < 1e-15, "gauss weight sum {wg}");
    }

    #[test]
    fn polynomial_is_exact_in_one_panel() {
        // K15 is exact through degree 23; x^10 must come out to rounding.
        let got = integrate(|x| x.powi(10), 0.0, 1.0, 1e-12).unwrap();
        assert!((got - 1.0 / 11.0).abs() < 1e-15, "got {got}");
    }

    #[test]
    fn sine_integral() {
        let got = integrate(f64::sin, 0.0, PI, 1e-12).unwrap();
        assert!((got - 2.0).abs() < 1e-12, "got {got}");
    }

    #[test]
    fn arctangent_integrand() {
        let got = integrate(|x| 1.0 / (1.0 + x * x), 0.0, 1.0, 1e-12).unwrap();
        assert!((got - PI / 4.0).abs() < 1e-13, "got {got}");
    }

    #[test]
    fn gaussian_second_moment() {
        // integral over p in (0, inf) of p^2 exp(-p^2/2) = sqrt(pi/2);
        // truncation at 12 sigma contributes ~1e-30 of the total.
        let got = integrate(|p| p * p * (-0.5 * p * p).exp(), 0.0, 12.0, 1e-12).unwrap();
        let want = (PI / 2.0).sqrt();
        assert!((got - want).abs() < 1e-13 * want, "got {got}, want {want}");
    }

    #[test]
    fn oscillatory_integrand_converges() {
        // sin^2 over 10 full periods: forces real refinement work.
        let got = integrate(|x| x.sin().powi(2), 0.0, 20.0 * PI, 1e-12).unwrap();
        assert!((got - 10.0 * PI).abs() < 1e-9, "got {got}");
    }

    #[test]
    fn empty_interval_is_zero() {
        assert_eq!(integrate(|x| x * x, 3.0, 3.0, 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn zero_integrand_terminates() {
        assert_eq!(integrate(|_| 0.0, 0.0, 1.0, 1e-14).unwrap(), 0.0);
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        // Pole exactly at the first panel's centre node.
        let err = integrate(|x| 1.0 / (x - 0.5), 0.0, 1.0, 1e-10).unwrap_err();
        assert!(matches!(err, Error::Numeric(_)), "got {err:?}");
    }

    #[test]
    fn divergent_integral_hits_panel_cap() {
        // 1/x on (0, 1]: scale-invariant near zero, so refinement can never
        // finish; the panel cap must convert that into an error.
        let err = integrate(|x| 1.0 / x, 0.0, 1.0, 1e-10).unwrap_err();
        assert!(matches!(err, Error::Numeric(_)), "got {err:?}");
    }

    #[test]
    fn bisect_finds_sqrt2() {
        let root = bisect(|x| Ok(x * x - 2.0), 0.0, 2.0, 1e-14).unwrap();
        assert!((root - 2.0f64.sqrt()).abs() < 1e-13, "got {root}");
    }

    #[test]
    fn bisect_finds_cosine_root() {
        let root = bisect(|x| Ok(x.cos()), 0.0, 2.0, 1e-13).unwrap();
        assert!((root - PI / 2.0).abs() < 1e-12, "got {root}");
    }

    #[test]
    fn bisect_accepts_exact_endpoint_root() {
        let root = bisect(|x| Ok(x - 2.0), 2.0, 5.0, 1e-12).unwrap();
        assert_eq!(root, 2.0);
    }

    #[test]
    fn bisect_rejects_unbracketed_root() {
        let err = bisect(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-12).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)), "got {err:?}");
    }

    #[test]
    fn bisect_propagates_closure_errors() {
        let err = bisect(
            |_| Err(Error::Numeric("inner failure".into())),
            0.0,
            1.0,
            1e-12,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Numeric(_)), "got {err:?}");
    }
}
