//! Closed-form spectrum of the `n × n` exponential covariance matrix
//! `C[i][j] = exp(−τ |i − j|)`.
//!
//! Eigenvectors have the form `e_j = cos(j θ + ψ)` and the angles satisfy
//!
//! ```text
//! (n + 1) θ_k + 2 atan((cos θ_k − e^τ) / sin θ_k) = (k − 1) π,   k = 1..n
//! ```
//!
//! with `θ_k ∈ ((k−1)π/n, kπ/(n+1))`. The eigenvalues follow as
//! `λ_k = sinh τ / (cosh τ − cos θ_k)`, strictly decreasing in `k`.
//! As `n → ∞` the fraction of terms needed for relative error `ε` tends to
//! `t(ε, τ) = (2/π) atan(tanh(τ/2) tan(π(1 − ε²)/2))`.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::spectra::{n_under, Spectrum};

/// Fixed-point iterations attempted before falling back to bisection.
pub const FIXED_POINT_MAX_ITER: usize = 100;
/// Fixed-point stopping criterion on |Δθ|.
pub const FIXED_POINT_STEP_TOL: f64 = 1e-13;
/// Required residual of the angle equation.
pub const RESIDUAL_TOL: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpSpectrum {
    pub n: usize,
    pub tau: f64,
    /// `θ_1 < θ_2 < … < θ_n`.
    pub thetas: Vec<f64>,
    /// `λ_1 > λ_2 > … > λ_n`.
    pub lambdas: Vec<f64>,
    /// Phases `ψ_k ∈ (−π/2, 0)`, present after [`ExpSpectrum::with_phases`].
    pub psis: Option<Vec<f64>>,
}

/// Left side of the angle equation minus `(k − 1)π`.
fn angle_residual(theta: f64, n: usize, k: usize, tau: f64) -> f64 {
    (n as f64 + 1.0) * theta + 2.0 * phase(theta, tau) - (k as f64 - 1.0) * PI
}

/// `ψ = atan((cos θ − e^τ) / sin θ)`, in `(−π/2, 0)`.
fn phase(theta: f64, tau: f64) -> f64 {
    ((theta.cos() - tau.exp()) / theta.sin()).atan()
}

/// `sinh τ / (cosh τ − cos θ)` evaluated without cancellation: both
/// numerator and denominator are multiplied by `2e^{−τ}` and the
/// denominator is rewritten as `(1 − e^{−τ})² + 4 e^{−τ} sin²(θ/2)`.
pub fn eigenvalue_from_angle(theta: f64, tau: f64) -> f64 {
    let q = (-tau).exp();
    let one_minus_q = -(-tau).exp_m1();
    let num = -(-2.0 * tau).exp_m1();
    let s = (0.5 * theta).sin();
    num / (one_minus_q * one_minus_q + 4.0 * q * s * s)
}

fn solve_one(n: usize, k: usize, tau: f64) -> Result<f64> {
    let nf = n as f64;
    let kf = k as f64;
    let lo = (kf - 1.0) * PI / nf;
    let hi = kf * PI / (nf + 1.0);
    let target = (kf - 1.0) * PI;

    let mut theta = lo.max(PI / (2.0 * (nf + 1.0)));
    let mut converged = false;
    for _ in 0..FIXED_POINT_MAX_ITER {
        let next = (target - 2.0 * phase(theta, tau)) / (nf + 1.0);
        if !(next > 0.0 && next < PI) {
            break;
        }
        let step = (next - theta).abs();
        theta = next;
        if step <= FIXED_POINT_STEP_TOL {
            converged = true;
            break;
        }
    }
    if converged && angle_residual(theta, n, k, tau).abs() <= RESIDUAL_TOL {
        return Ok(theta);
    }

    // The residual is strictly increasing in θ and changes sign on the
    // bracket, so bisection always lands.
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if angle_residual(mid, n, k, tau) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let theta = 0.5 * (a + b);
    if angle_residual(theta, n, k, tau).abs() <= RESIDUAL_TOL {
        Ok(theta)
    } else {
        Err(Error::NoConvergence {
            what: "exponential-covariance angle solve",
            iterations: FIXED_POINT_MAX_ITER + 200,
        })
    }
}

/// Solves for all angles and eigenvalues. Angles are independent and are
/// solved in parallel; each one is deterministic.
pub fn solve_thetas(n: usize, tau: f64) -> Result<ExpSpectrum> {
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    if !(tau.is_finite() && tau > 0.0) {
        return Err(invalid("tau", format!("must be positive, got {tau}")));
    }
    let thetas = (1..=n)
        .into_par_iter()
        .map(|k| solve_one(n, k, tau))
        .collect::<Result<Vec<f64>>>()?;
    let lambdas = thetas.iter().map(|&t| eigenvalue_from_angle(t, tau)).collect();
    Ok(ExpSpectrum {
        n,
        tau,
        thetas,
        lambdas,
        psis: None,
    })
}

impl ExpSpectrum {
    /// Residuals of the angle equation, one per `k`.
    pub fn residuals(&self) -> Vec<f64> {
        self.thetas
            .iter()
            .enumerate()
            .map(|(i, &t)| angle_residual(t, self.n, i + 1, self.tau))
            .collect()
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum::from_sorted_unchecked(self.lambdas.clone())
    }

    /// Fills in the phases `ψ_k`.
    pub fn with_phases(mut self) -> Self {
        self.psis = Some(self.thetas.iter().map(|&t| phase(t, self.tau)).collect());
        self
    }

    /// Unnormalized eigenvector `k` (1-based): entries `cos(j θ_k + ψ_k)`,
    /// `j = 1..n`.
    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        let theta = self.thetas[k - 1];
        let psi = phase(theta, self.tau);
        (1..=self.n)
            .map(|j| (j as f64 * theta + psi).cos())
            .collect()
    }

    /// Squared Euclidean norm of [`ExpSpectrum::eigenvector`]:
    /// `n/2 + (−1)^{k−1} sin(nθ_k) / (2 sin θ_k)`, which follows from
    /// summing `cos(2jθ + 2ψ)` with `(n + 1)θ + 2ψ = (k − 1)π`.
    pub fn eigenvector_norm_sq(&self, k: usize) -> f64 {
        let theta = self.thetas[k - 1];
        let sign = if (k - 1).is_multiple_of(2) { 1.0 } else { -1.0 };
        0.5 * self.n as f64 + sign * (self.n as f64 * theta).sin() / (2.0 * theta.sin())
    }
}

/// Limiting ratio `N̲^ε / n` for the exponential covariance matrix.
pub fn asymptotic_t(eps: f64, tau: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(invalid("eps", format!("must lie in (0, 1], got {eps}")));
    }
    if !(tau > 0.0) {
        return Err(invalid("tau", format!("must be positive, got {tau}")));
    }
    let inner = (0.5 * tau).tanh() * (FRAC_PI_2 * (1.0 - eps * eps)).tan();
    Ok(2.0 / PI * inner.atan())
}

/// `n_under / n` from the analytic spectrum at finite `n`.
pub fn empirical_ratio(n: usize, tau: f64, eps: f64) -> Result<f64> {
    let spec = solve_thetas(n, tau)?;
    Ok(n_under(&spec.spectrum(), eps)? as f64 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn single_point() {
        for tau in [0.1, 2.0, 10.0] {
            let s = solve_thetas(1, tau).unwrap();
            assert_relative_eq!(s.lambdas[0], 1.0, max_relative = 1e-12);
        }
        assert_eq!(empirical_ratio(1, 2.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn brackets_and_ordering() {
        let (n, tau) = (500, 1.0);
        let s = solve_thetas(n, tau).unwrap();
        for (i, &t) in s.thetas.iter().enumerate() {
            let k = (i + 1) as f64;
            assert!(t > (k - 1.0) * PI / n as f64 && t < k * PI / (n as f64 + 1.0), "k={k}");
        }
        assert!(s.thetas.windows(2).all(|w| w[0] < w[1]));
        assert!(s.lambdas.windows(2).all(|w| w[0] > w[1]));
        assert!(s.residuals().iter().all(|r| r.abs() <= RESIDUAL_TOL));
    }

    #[test]
    fn trace_is_n() {
        for (n, tau) in [(10, 0.05), (300, 0.7), (1000, 4.0)] {
            let s = solve_thetas(n, tau).unwrap();
            let sum: f64 = s.lambdas.iter().sum();
            assert!((sum - n as f64).abs() <= 1e-8 * n as f64, "{n} {tau}: {sum}");
        }
    }

    #[test]
    fn frobenius_matches_entry_sum() {
        let (n, tau) = (120, 0.4);
        let s = solve_thetas(n, tau).unwrap();
        let sq: f64 = s.lambdas.iter().map(|l| l * l).sum();
        let mut direct = 0.0;
        for i in 0..n {
            for j in 0..n {
                direct += (-2.0 * tau * (i as f64 - j as f64).abs()).exp();
            }
        }
        assert!((sq - direct).abs() <= 1e-7 * direct);
    }

    #[test]
    fn eigenvectors_satisfy_matrix_equation() {
        let (n, tau) = (40, 0.3);
        let s = solve_thetas(n, tau).unwrap().with_phases();
        let psis = s.psis.as_ref().unwrap();
        assert!(psis.iter().all(|&p| p > -FRAC_PI_2 && p < 0.0));
        for k in [1, 2, 17, 40] {
            let v = s.eigenvector(k);
            let norm_sq: f64 = v.iter().map(|x| x * x).sum();
            assert_relative_eq!(norm_sq, s.eigenvector_norm_sq(k), max_relative = 1e-10);
            for i in 0..n {
                let cv: f64 = (0..n)
                    .map(|j| (-tau * (i as f64 - j as f64).abs()).exp() * v[j])
                    .sum();
                assert!((cv - s.lambdas[k - 1] * v[i]).abs() < 1e-10 * norm_sq.sqrt());
            }
        }
    }

    #[test]
    fn small_tau_falls_back_without_losing_accuracy() {
        // the fixed point map is expansive for τ ≪ 1/n
        let s = solve_thetas(50, 0.005).unwrap();
        assert!(s.residuals().iter().all(|r| r.abs() <= RESIDUAL_TOL));
        let sum: f64 = s.lambdas.iter().sum();
        assert!((sum - 50.0).abs() < 1e-8 * 50.0);
    }

    #[test]
    fn t_limits_and_monotonicity() {
        assert_eq!(asymptotic_t(1.0, 3.0).unwrap(), 0.0);
        for eps in [0.05, 0.1, 0.3, 0.7] {
            let big = asymptotic_t(eps, 60.0).unwrap();
            assert!((big - (1.0 - eps * eps)).abs() < 1e-10);
        }
        let mut last = 0.0;
        for tau in [0.01, 0.1, 1.0, 5.0] {
            let t = asymptotic_t(0.1, tau).unwrap();
            assert!(t > last);
            last = t;
        }
        let mut last = 1.0;
        for eps in [0.01, 0.1, 0.5, 0.9] {
            let t = asymptotic_t(eps, 1.0).unwrap();
            assert!(t < last && (0.0..1.0).contains(&t));
            last = t;
        }
        assert!(asymptotic_t(0.0, 1.0).is_err());
    }

    #[test]
    fn finite_n_ratio_converges_to_t() {
        let t = asymptotic_t(0.1, 1.0).unwrap();
        let gaps: Vec<f64> = [100, 400, 1600]
            .iter()
            .map(|&n| (empirical_ratio(n, 1.0, 0.1).unwrap() - t).abs())
            .collect();
        // n_under is an integer, so consecutive gaps can tie
        assert!(gaps[0] >= gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
        let r = empirical_ratio(2000, 1.0, 0.1).unwrap();
        assert!((r - t).abs() <= 0.01);
    }
}
