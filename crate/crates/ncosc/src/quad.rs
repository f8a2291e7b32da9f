//! Shared adaptive quadrature engine.
//!
//! Every phase integral in the crate goes through [`adaptive_simpson`] so that
//! the various phase conventions differ only algebraically, never by the
//! integration scheme.

use crate::error::{Error, Result};

/// Bisection depth cap: at most 2^20 subintervals.
const MAX_DEPTH: u32 = 20;

/// Integrate `f` over `[a, b]` with adaptive Simpson refinement down to the
/// absolute tolerance `abs_tol`.
///
/// `a <= b` is required; non-finite integrand values or hitting the bisection
/// cap report a quadrature failure.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::QuadratureFailure(format!(
            "non-finite interval [{a}, {b}]"
        )));
    }
    if a > b {
        return Err(Error::QuadratureFailure(format!(
            "inverted interval [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let fa = eval(&f, a)?;
    let fb = eval(&f, b)?;
    let m = 0.5 * (a + b);
    let fm = eval(&f, m)?;
    let whole = simpson(a, b, fa, fm, fb);
    recurse(&f, a, b, fa, fm, fb, whole, abs_tol, 0)
}

fn eval<F: Fn(f64) -> f64>(f: &F, t: f64) -> Result<f64> {
    let v = f(t);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::QuadratureFailure(format!(
            "integrand non-finite at t={t}"
        )))
    }
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = eval(f, lm)?;
    let frm = eval(f, rm)?;
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    // Richardson: Simpson halving overestimates the true error by ~15x.
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::QuadratureFailure(format!(
            "bisection cap reached on [{a}, {b}] (residual {:.3e})",
            delta.abs() / 15.0
        )));
    }
    let half_tol = 0.5 * tol;
    let l = recurse(f, a, m, fa, flm, fm, left, half_tol, depth + 1)?;
    let r = recurse(f, m, b, fm, frm, fb, right, half_tol, depth + 1)?;
    Ok(l + r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        // Simpson is exact for cubics.
        let v = adaptive_simpson(|t| t * t * t - 2.0 * t + 1.0, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - (4.0 - 4.0 + 2.0)).abs() < 1e-13, "{v}");
    }

    #[test]
    fn oscillatory_integrand() {
        let v = adaptive_simpson(|t| (10.0 * t).sin(), 0.0, 1.0, 1e-12).unwrap();
        let exact = (1.0 - (10.0f64).cos()) / 10.0;
        assert!((v - exact).abs() < 1e-11, "{v} vs {exact}");
    }

    #[test]
    fn empty_interval_is_zero() {
        assert_eq!(adaptive_simpson(|t| t, 0.7, 0.7, 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn non_finite_integrand_rejected() {
        let err = adaptive_simpson(|t| 1.0 / t, 0.0, 1.0, 1e-10).unwrap_err();
        assert!(matches!(err, Error::QuadratureFailure(_)));
    }

    #[test]
    fn inverted_interval_rejected() {
        assert!(adaptive_simpson(|t| t, 1.0, 0.0, 1e-10).is_err());
    }
}
