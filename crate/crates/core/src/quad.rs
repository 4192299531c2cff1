//! Adaptive Simpson quadrature and bisection.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 48;

/// ∫ₐᵇ f to an absolute tolerance, by adaptive Simpson with Richardson
/// correction.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    refine(&f, a, b, fa, fm, fb, whole, abs_tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Root of a non-decreasing `f` on `[lo, hi]` by bisection, stopping when
/// the bracket is narrower than `x_tol`. Endpoint values that already
/// satisfy `f ≥ 0` at `lo` or `f ≤ 0` at `hi` return that endpoint.
pub fn bisect_increasing<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    x_tol: f64,
    max_iter: usize,
) -> Result<f64> {
    if f(lo) >= 0.0 {
        return Ok(lo);
    }
    if f(hi) <= 0.0 {
        return Ok(hi);
    }
    for _ in 0..max_iter {
        if hi - lo <= x_tol {
            return Ok(0.5 * (lo + hi));
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if hi - lo <= x_tol {
        Ok(0.5 * (lo + hi))
    } else {
        Err(Error::NoConvergence {
            what: "bisection",
            iterations: max_iter,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn integrates_smooth_functions() {
        let v = adaptive_simpson(|x| x.sin(), 0.0, PI, 1e-12);
        assert!((v - 2.0).abs() < 1e-11);
        let v = adaptive_simpson(|x| (-x * x).exp(), -6.0, 6.0, 1e-12);
        assert!((v - PI.sqrt()).abs() < 1e-11);
        assert_eq!(adaptive_simpson(|x| x, 1.0, 1.0, 1e-12), 0.0);
    }

    #[test]
    fn polynomials_up_to_cubic_are_exact() {
        let v = adaptive_simpson(|x| 4.0 * x * x * x - x + 2.0, -1.0, 3.0, 1e-3);
        assert!((v - (81.0 - 1.0 - 4.0 + 8.0)).abs() < 1e-12);
    }

    #[test]
    fn bisection_finds_roots() {
        let r = bisect_increasing(|x| x * x * x - 2.0, 0.0, 2.0, 1e-14, 200).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-13);
        assert_eq!(bisect_increasing(|x| x + 1.0, 0.0, 1.0, 1e-12, 10).unwrap(), 0.0);
        assert_eq!(bisect_increasing(|x| x - 5.0, 0.0, 1.0, 1e-12, 10).unwrap(), 1.0);
        assert!(bisect_increasing(|x| x - 0.3, 0.0, 1.0, 1e-15, 5).is_err());
    }
}
