//! Marčenko–Pastur limit of `(1/d) VᵀV` for `d × n` matrices with i.i.d.
//! entries of variance `σ²` and `n/d → α`.
//!
//! The limit measure is a continuous part `ν` on `[λ₋, λ₊]`,
//! `λ± = σ²(1 ± √α)²`, with density
//! `√((λ₊ − x)(x − λ₋)) / (2π σ² α x)`, plus an atom of mass `1 − 1/α` at
//! zero when `α > 1`.
//!
//! Partial integrals of `ν` are evaluated after the change of variables
//! `x = λ₋ + (λ₊ − λ₋) sin² u`, which turns both square-root endpoint
//! singularities into a smooth integrand on `[0, π/2]`.
//!
//! From these the module derives the asymptotic embedding ratio
//! `ρ(ε) = lim N̲^ε / n`, its derivative, the limiting ε-rank ratio and the
//! dual best-k error.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::quad::{adaptive_simpson, bisect_increasing};

/// Absolute tolerance of every partial-moment quadrature.
pub const QUAD_TOL: f64 = 1e-11;
/// Quantile bisection stops when the bracket is this fraction of the support.
pub const QUANTILE_REL_TOL: f64 = 1e-12;
pub const BISECTION_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MPParams {
    sigma2: f64,
    alpha: f64,
    lambda_minus: f64,
    lambda_plus: f64,
}

impl MPParams {
    pub fn new(sigma2: f64, alpha: f64) -> Result<Self> {
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(invalid("sigma2", format!("must be positive, got {sigma2}")));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(invalid("alpha", format!("must be positive, got {alpha}")));
        }
        let r = alpha.sqrt();
        Ok(Self {
            sigma2,
            alpha,
            lambda_minus: sigma2 * (1.0 - r) * (1.0 - r),
            lambda_plus: sigma2 * (1.0 + r) * (1.0 + r),
        })
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambda_minus(&self) -> f64 {
        self.lambda_minus
    }

    pub fn lambda_plus(&self) -> f64 {
        self.lambda_plus
    }

    fn width(&self) -> f64 {
        self.lambda_plus - self.lambda_minus
    }

    /// Mass of the continuous part, `min(1, 1/α)`.
    pub fn continuous_mass(&self) -> f64 {
        if self.alpha > 1.0 {
            1.0 / self.alpha
        } else {
            1.0
        }
    }

    /// Mass of the atom at zero, `max(0, 1 − 1/α)`.
    pub fn atom(&self) -> f64 {
        1.0 - self.continuous_mass()
    }

    /// Substitution parameter `u` with `x = λ₋ + (λ₊ − λ₋) sin² u`.
    fn u_of(&self, y: f64) -> f64 {
        let t = ((y - self.lambda_minus) / self.width()).clamp(0.0, 1.0);
        t.sqrt().asin()
    }
}

/// Density of the continuous part `ν`; zero outside `(λ₋, λ₊)`.
pub fn mp_density(x: f64, p: &MPParams) -> f64 {
    if x <= p.lambda_minus || x >= p.lambda_plus || x <= 0.0 {
        return 0.0;
    }
    ((p.lambda_plus - x) * (x - p.lambda_minus)).sqrt() / (2.0 * PI * p.sigma2 * p.alpha * x)
}

/// `∫_{λ₋}^{y} x^order dν(x)` for `order ∈ {0, 1}`. The atom at zero is
/// never included.
pub fn partial_moment(y: f64, p: &MPParams, order: u32) -> Result<f64> {
    if order > 1 {
        return Err(invalid("order", format!("must be 0 or 1, got {order}")));
    }
    let slack = 1e-14 * p.lambda_plus;
    if !(y >= p.lambda_minus - slack && y <= p.lambda_plus + slack) {
        return Err(invalid(
            "y",
            format!(
                "{y} lies outside the support [{}, {}]",
                p.lambda_minus, p.lambda_plus
            ),
        ));
    }
    Ok(moment_to_u(p.u_of(y), p, order))
}

/// Partial moment as a function of the substitution parameter.
fn moment_to_u(u_max: f64, p: &MPParams, order: u32) -> f64 {
    if u_max <= 0.0 {
        return 0.0;
    }
    let w = p.width();
    let lm = p.lambda_minus;
    // dν = (1/(π σ² α)) w² sin²u cos²u / x du
    let c = 1.0 / (PI * p.sigma2 * p.alpha);
    let integrand = |u: f64| {
        let (s, co) = u.sin_cos();
        let s2 = s * s;
        let c2 = co * co;
        match order {
            0 if lm == 0.0 => w * c2,
            0 => w * w * s2 * c2 / (lm + w * s2),
            _ => w * w * s2 * c2,
        }
    };
    c * adaptive_simpson(integrand, 0.0, u_max, QUAD_TOL)
}

/// `μ([0, y])` including the atom, for `y ≥ 0`.
pub fn cumulative_mass(y: f64, p: &MPParams) -> f64 {
    if y < 0.0 {
        return 0.0;
    }
    let cont = if y <= p.lambda_minus {
        0.0
    } else {
        moment_to_u(p.u_of(y.min(p.lambda_plus)), p, 0)
    };
    p.atom() + cont
}

fn check_open_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid("eps", format!("must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

/// The `y ∈ [λ₋, λ₊]` with `∫_{λ₋}^{y} x dμ = σ² ε²`.
pub fn solve_quantile(eps: f64, p: &MPParams) -> Result<f64> {
    check_open_eps(eps)?;
    let target = p.sigma2 * eps * eps;
    let u = bisect_increasing(
        |u| moment_to_u(u, p, 1) - target,
        0.0,
        FRAC_PI_2,
        // bracket tolerance in u mapped from the requested tolerance in y:
        // |dy/du| ≤ width, so this is at least as tight.
        QUANTILE_REL_TOL,
        BISECTION_MAX_ITER,
    )?;
    let s = u.sin();
    Ok(p.lambda_minus + p.width() * s * s)
}

/// Asymptotic embedding ratio `ρ(ε) = ∫_{y}^{λ₊} dμ`.
pub fn asymptotic_ratio(eps: f64, p: &MPParams) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(invalid("eps", format!("must lie in (0, 1], got {eps}")));
    }
    if eps == 1.0 {
        return Ok(0.0);
    }
    let y = solve_quantile(eps, p)?;
    let below = moment_to_u(p.u_of(y), p, 0);
    Ok((p.continuous_mass() - below).max(0.0))
}

/// Limit of `R^ε / n` where `R^ε` counts eigenvalues `λ` of `VᵀV` with
/// `√λ ≥ ε`, i.e. `λ̂ = λ/d ≥ ε²/d`. The atom at zero (α > 1) always falls
/// below the threshold.
pub fn asymptotic_eps_rank_ratio(eps: f64, d: usize, p: &MPParams) -> Result<f64> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(invalid("eps", format!("must be positive, got {eps}")));
    }
    if d == 0 {
        return Err(invalid("d", "must be at least 1"));
    }
    let threshold = eps * eps / d as f64;
    Ok((1.0 - cumulative_mass(threshold, p)).clamp(0.0, 1.0))
}

/// `dρ/dε = −2σ²ε / y(ε)`.
pub fn rho_derivative(eps: f64, p: &MPParams) -> Result<f64> {
    let y = solve_quantile(eps, p)?;
    Ok(-2.0 * p.sigma2 * eps / y)
}

/// Asymptotic relative r.m.s. error of projecting onto the best
/// `k`-dimensional subspace, given `k/n`.
pub fn best_k_error(k_over_n: f64, p: &MPParams) -> Result<f64> {
    let cont = p.continuous_mass();
    if !(0.0..=1.0).contains(&k_over_n) {
        return Err(invalid("k_over_n", format!("must lie in [0, 1], got {k_over_n}")));
    }
    if k_over_n > cont * (1.0 + 1e-14) {
        return Err(invalid(
            "k_over_n",
            format!("{k_over_n} exceeds the non-zero spectral mass {cont}"),
        ));
    }
    // ν([λ₋, y]) must equal the mass left after removing the top k.
    let target = cont - k_over_n;
    if target <= 0.0 {
        return Ok(0.0);
    }
    let u = bisect_increasing(
        |u| moment_to_u(u, p, 0) - target,
        0.0,
        FRAC_PI_2,
        QUANTILE_REL_TOL,
        BISECTION_MAX_ITER,
    )?;
    let moment = moment_to_u(u, p, 1);
    Ok((moment / p.sigma2).clamp(0.0, 1.0).sqrt())
}
