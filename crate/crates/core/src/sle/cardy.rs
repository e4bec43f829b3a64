//! Cardy's hitting function
//!
//! `G(z) = c ∫_0^z (u(1-u))^{-4/kappa} du` on `[0, 1]` and
//! `G(z) = c ∫_z^∞ (u(u-1))^{-4/kappa} du` beyond 1,
//!
//! each normalized to equal 1 at `z = 1`. Both reduce to incomplete beta
//! integrals `∫_0^x v^{a-1} (1-v)^{b-1} dv`, evaluated by quadrature after a
//! substitution that removes the endpoint singularity.

use crate::error::{invalid, Result};

const QUAD_TOL: f64 = 1e-14;

/// `∫_0^x v^{a-1} (1-v)^{b-1} dv` for `x <= 1/2`: with `v = w^{1/a}` the
/// integrand becomes `(1 - w^{1/a})^{b-1} / a`, smooth on `[0, x^a]`.
fn lower_piece(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let f = |w: f64| (1.0 - w.powf(1.0 / a)).powf(b - 1.0) / a;
    quadrature::double_exponential::integrate(f, 0.0, x.powf(a), QUAD_TOL).integral
}

/// Unnormalized incomplete beta integral on `[0, x]`, `0 <= x <= 1`. The
/// part beyond 1/2 is reflected through `v -> 1 - v`.
fn incomplete_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.5 {
        lower_piece(x, a, b)
    } else {
        lower_piece(0.5, a, b) + lower_piece(0.5, b, a) - lower_piece(1.0 - x, b, a)
    }
}

fn exponent(kappa: f64) -> Result<f64> {
    if !(kappa > 4.0) {
        return Err(invalid("integral diverges for kappa <= 4"));
    }
    if !(kappa < 8.0) {
        return Err(invalid("the hitting function needs kappa < 8"));
    }
    Ok(4.0 / kappa)
}

/// `G(z, kappa)` for `z >= 0` (including `+inf`) and `4 < kappa < 8`.
pub fn cardy_g(z: f64, kappa: f64) -> Result<f64> {
    let alpha = exponent(kappa)?;
    if !(z >= 0.0) {
        return Err(invalid("the hitting function is defined for z >= 0"));
    }
    if z <= 1.0 {
        let a = 1.0 - alpha;
        Ok(incomplete_beta(z, a, a) / (2.0 * lower_piece(0.5, a, a)))
    } else {
        // u = 1/v turns the tail integral into an incomplete beta on [0, 1/z]
        let (a, b) = (2.0 * alpha - 1.0, 1.0 - alpha);
        Ok(incomplete_beta(1.0 / z, a, b) / incomplete_beta(1.0, a, b))
    }
}

/// Bisection for `kappa` in `[lo, hi]` with `G(z, kappa) = target`.
pub fn cardy_kappa_root(z: f64, target: f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let f = |k: f64| cardy_g(z, k).map(|g| g - target);
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (f(a)?, f(b)?);
    if fa * fb > 0.0 {
        return Err(invalid("no sign change on the bracket"));
    }
    while b - a > tol {
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}
