//! Spectra of covariance operators and the truncation complexity measures
//! built on them.
//!
//! For a descending spectrum `λ_1 ≥ λ_2 ≥ …` two complexity counts are used:
//!
//! * `n_under(ε)`: the fewest leading terms whose discarded tail carries at
//!   most an `ε²` fraction of the total variance, i.e. the shortest
//!   truncation with relative r.m.s. error `≤ ε`. Invariant under scaling.
//! * `n_over(ε)`: the number of eigenvalues with `√λ ≥ ε` (the usual ε-rank).
//!
//! They satisfy `n_under ≥ (1-ε²)² tr² / ‖·‖_F²` and `n_over ≤ ε⁻⁴ ‖·‖_F²`,
//! which [`ComplexityReport::evaluate`] checks on every call.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::matrix::SymMatrix;

/// Descending eigenvalues with their sum and sum of squares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    trace: f64,
    frobenius_sq: f64,
    /// `tail[k] = Σ_{i ≥ k} λ_i` (0-based), summed from the small end.
    #[serde(skip)]
    tail: Vec<f64>,
}

impl Spectrum {
    /// Wraps eigenvalues that are already sorted non-increasing and
    /// non-negative.
    pub fn new(eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.windows(2).any(|w| w[0] < w[1]) {
            return Err(invalid("eigenvalues", "must be sorted non-increasing"));
        }
        if let Some(&neg) = eigenvalues.iter().find(|x| !(**x >= 0.0)) {
            return Err(invalid("eigenvalues", format!("entry {neg} is negative or NaN")));
        }
        Ok(Self::from_sorted_unchecked(eigenvalues))
    }

    /// Sorts arbitrary non-negative values into a spectrum.
    pub fn from_unsorted(mut values: Vec<f64>) -> Result<Self> {
        values.sort_by(|a, b| b.total_cmp(a));
        Self::new(values)
    }

    pub(crate) fn from_sorted_unchecked(eigenvalues: Vec<f64>) -> Self {
        let n = eigenvalues.len();
        let mut tail = vec![0.0; n + 1];
        for i in (0..n).rev() {
            tail[i] = tail[i + 1] + eigenvalues[i];
        }
        let trace = tail[0];
        let frobenius_sq = eigenvalues.iter().rev().map(|x| x * x).sum();
        Self {
            eigenvalues,
            trace,
            frobenius_sq,
            tail,
        }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Σλ.
    pub fn trace(&self) -> f64 {
        self.trace
    }

    /// Σλ².
    pub fn frobenius_sq(&self) -> f64 {
        self.frobenius_sq
    }

    /// Σ_{i > count} λ_i (1-based), i.e. the variance left after keeping
    /// `count` terms.
    pub fn tail_sum(&self, count: usize) -> f64 {
        self.tail[count.min(self.len())]
    }

    /// Multiplies every eigenvalue by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        Self::from_sorted_unchecked(self.eigenvalues.iter().map(|x| x * c).collect())
    }
}

/// Output of [`sym_eig`].
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub spectrum: Spectrum,
    /// Orthonormal eigenvectors as rows; row `k` pairs with eigenvalue `k`.
    pub vectors: Option<Vec<f64>>,
    /// `|Σλ − tr M| / |tr M|`.
    pub trace_residual: f64,
    /// `|Σλ² − ‖M‖_F²| / ‖M‖_F²`.
    pub frobenius_residual: f64,
}

impl Decomposition {
    pub fn n(&self) -> usize {
        self.spectrum.len()
    }

    /// Eigenvector `k` (0-based), if vectors were requested.
    pub fn vector(&self, k: usize) -> Option<&[f64]> {
        let n = self.n();
        self.vectors.as_ref().map(|v| &v[k * n..(k + 1) * n])
    }
}

/// Eigendecomposition of a positive semidefinite matrix.
///
/// Eigenvalues in `[-n·u·λ₁, 0)` are rounded up to zero; anything more
/// negative means the input was not PSD and is reported as an error.
pub fn sym_eig(m: &SymMatrix, want_vectors: bool) -> Result<Decomposition> {
    let n = m.n();
    if n == 0 {
        return Err(invalid("matrix", "must be at least 1x1"));
    }
    let pairs = linalg::symmetric_eigen(m, want_vectors)?;
    let mut values = pairs.values;
    let top = values[0].max(0.0);
    let floor = -(n as f64) * f64::EPSILON * top;
    for v in values.iter_mut() {
        if *v < 0.0 {
            if *v < floor {
                return Err(Error::NotPositiveSemidefinite { value: *v, floor });
            }
            *v = 0.0;
        }
    }
    let spectrum = Spectrum::from_sorted_unchecked(values);
    let tr = m.trace();
    let fro = m.frobenius_sq();
    let trace_residual = rel_gap(spectrum.trace(), tr);
    let frobenius_residual = rel_gap(spectrum.frobenius_sq(), fro);
    Ok(Decomposition {
        spectrum,
        vectors: pairs.vectors,
        trace_residual,
        frobenius_residual,
    })
}

fn rel_gap(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(invalid("eps", format!("must lie in (0, 1], got {eps}")));
    }
    Ok(())
}

/// Smallest `N` with `Σ_{i>N} λ_i ≤ ε² Σ λ_i`.
pub fn n_under(s: &Spectrum, eps: f64) -> Result<usize> {
    check_eps(eps)?;
    if !(s.trace() > 0.0) {
        return Err(Error::ZeroTrace);
    }
    let budget = eps * eps * s.trace();
    Ok((0..=s.len())
        .find(|&k| s.tail_sum(k) <= budget)
        .unwrap_or(s.len()))
}

/// Number of eigenvalues with `√λ ≥ ε`.
pub fn n_over(s: &Spectrum, eps: f64) -> usize {
    s.eigenvalues().iter().take_while(|&&l| l.sqrt() >= eps).count()
}

/// `(1-ε²)² tr² / ‖·‖_F²`, a lower bound for [`n_under`].
pub fn lower_bound(trace: f64, frobenius_sq: f64, eps: f64) -> f64 {
    let one_minus = 1.0 - eps * eps;
    one_minus * one_minus * trace * trace / frobenius_sq
}

/// `ε⁻⁴ ‖·‖_F²`, an upper bound for [`n_over`].
pub fn upper_bound_nover(frobenius_sq: f64, eps: f64) -> f64 {
    frobenius_sq / eps.powi(4)
}

/// Relative r.m.s. error `√(Σ_{i>N} λ_i / Σ λ_i)` of keeping `count` terms.
pub fn truncation_error(s: &Spectrum, count: usize) -> Result<f64> {
    if count > s.len() {
        return Err(invalid(
            "count",
            format!("{count} exceeds spectrum length {}", s.len()),
        ));
    }
    if !(s.trace() > 0.0) {
        return Err(Error::ZeroTrace);
    }
    Ok((s.tail_sum(count) / s.trace()).max(0.0).sqrt())
}

/// `tr M − Σ_{k<count} v_kᵀ M v_k`: the variance of `M` not captured by
/// its leading `count` eigenvectors, computed from the matrix itself.
pub fn projected_tail(m: &SymMatrix, dec: &Decomposition, count: usize) -> Result<f64> {
    if dec.vectors.is_none() {
        return Err(invalid("decomposition", "eigenvectors were not computed"));
    }
    let captured: f64 = (0..count.min(dec.n()))
        .map(|k| {
            let v = dec.vector(k).expect("vectors present");
            let mv = m.mul_vec(v);
            v.iter().zip(&mv).map(|(a, b)| a * b).sum::<f64>()
        })
        .sum();
    Ok(m.trace() - captured)
}

/// All complexity measures of one spectrum at one tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub eps: f64,
    pub n_under: usize,
    pub n_over: usize,
    pub lower_bound: f64,
    pub upper_bound_nover: f64,
    /// Relative tail energy `Σ_{i>n_under} λ_i / Σ λ_i`.
    pub tail_energy_fraction: f64,
}

impl ComplexityReport {
    /// Computes every measure and fails if either bound is violated.
    pub fn evaluate(s: &Spectrum, eps: f64) -> Result<Self> {
        let n_under = n_under(s, eps)?;
        let n_over = n_over(s, eps);
        let lb = lower_bound(s.trace(), s.frobenius_sq(), eps);
        let ub = upper_bound_nover(s.frobenius_sq(), eps);
        // Slack of a few ulps for spectra whose bound is attained exactly
        // (flat spectra give lb = (1-ε²)² n).
        if (n_under as f64) < lb * (1.0 - 1e-12) {
            return Err(Error::BoundViolated(format!(
                "n_under = {n_under} < lower bound {lb} at eps = {eps}"
            )));
        }
        if (n_over as f64) > ub * (1.0 + 1e-12) {
            return Err(Error::BoundViolated(format!(
                "n_over = {n_over} > upper bound {ub} at eps = {eps}"
            )));
        }
        Ok(Self {
            eps,
            n_under,
            n_over,
            lower_bound: lb,
            upper_bound_nover: ub,
            tail_energy_fraction: s.tail_sum(n_under) / s.trace(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayModel {
    /// `λ_n ≈ C n^{-p}`: regress `ln λ_n` on `ln n`.
    Power,
    /// `λ_n ≈ C exp(-c n^{1/d})`: regress `ln λ_n` on `n^{1/d}`.
    StretchedExp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub model: DecayModel,
    /// Power exponent `p` or exponential rate `c`, reported positive for
    /// decaying spectra.
    pub rate: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Number of eigenvalues used in the fit.
    pub points: usize,
}

/// Relative floor below which eigenvalues are treated as rounding noise.
pub const DECAY_FLOOR: f64 = 1e-14;
/// Minimum number of eigenvalues above the floor.
pub const DECAY_MIN_POINTS: usize = 20;

/// Least-squares fit of the eigenvalue decay, using `λ_2 … λ_last` where
/// `λ_last` is the last eigenvalue above `1e-14 λ_1`.
pub fn decay_fit(s: &Spectrum, model: DecayModel, d: usize) -> Result<DecayFit> {
    if d == 0 {
        return Err(invalid("d", "dimension must be at least 1"));
    }
    let ev = s.eigenvalues();
    let top = ev.first().copied().unwrap_or(0.0);
    let usable = ev.iter().take_while(|&&l| l > DECAY_FLOOR * top).count();
    if usable < DECAY_MIN_POINTS {
        return Err(Error::InsufficientData(format!(
            "{usable} eigenvalues above the {DECAY_FLOOR:e} floor, need {DECAY_MIN_POINTS}"
        )));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = (2..=usable)
        .map(|n| {
            let x = match model {
                DecayModel::Power => (n as f64).ln(),
                DecayModel::StretchedExp => (n as f64).powf(1.0 / d as f64),
            };
            (x, ev[n - 1].ln())
        })
        .unzip();
    let line = least_squares(&xs, &ys);
    Ok(DecayFit {
        model,
        rate: -line.slope,
        intercept: line.intercept,
        r_squared: line.r_squared,
        points: xs.len(),
    })
}

/// Ordinary least-squares line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn least_squares(xs: &[f64], ys: &[f64]) -> Line {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    Line {
        slope,
        intercept,
        r_squared,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{
        assemble_covariance, assemble_index_covariance, build_domain, DomainTag, KernelFamily,
        KernelSpec, Limits, Resolution,
    };
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn spec(v: &[f64]) -> Spectrum {
        Spectrum::new(v.to_vec()).unwrap()
    }

    /// Independent scan: accumulate the head until the remainder fits.
    fn oracle_n_under(values: &[f64], eps: f64) -> usize {
        let total: f64 = values.iter().sum();
        let mut head = 0.0;
        for (k, v) in values.iter().enumerate() {
            if total - head <= eps * eps * total * (1.0 + 1e-13) {
                return k;
            }
            head += v;
        }
        values.len()
    }

    #[test]
    fn n_under_examples() {
        assert_eq!(n_under(&spec(&[3.0, 1.0]), 0.5).unwrap(), 1);
        assert_eq!(n_under(&spec(&[3.0, 1.0, 0.5]), 1.0).unwrap(), 0);
        assert!(matches!(n_under(&spec(&[0.0, 0.0]), 0.1), Err(Error::ZeroTrace)));
        assert!(n_under(&spec(&[1.0]), 0.0).is_err());
        assert!(n_under(&spec(&[1.0]), 1.5).is_err());
    }

    #[test]
    fn n_over_examples() {
        let s = spec(&[4.0, 1.0, 0.01]);
        assert_eq!(n_over(&s, 0.5), 2);
        assert_eq!(n_over(&s, 3.0), 0);
        // inclusive at the threshold
        assert_eq!(n_over(&s, 1.0), 2);
        assert_eq!(n_over(&s, 0.1), 3);
    }

    #[test]
    fn bounds_examples() {
        for eps in [0.1, 0.5, 0.9] {
            let n = 37.0;
            let one = 1.0 - eps * eps;
            assert_relative_eq!(lower_bound(n, n, eps), one * one * n, max_relative = 1e-15);
            assert_relative_eq!(lower_bound(2.0, 4.0, eps), one * one, max_relative = 1e-15);
        }
        assert_eq!(upper_bound_nover(1.0, 1.0), 1.0);
        let s = spec(&[4.0, 1.0, 0.01]);
        assert_relative_eq!(upper_bound_nover(s.frobenius_sq(), 0.5), 272.0016, max_relative = 1e-12);
    }

    #[test]
    fn truncation_error_examples() {
        let s = spec(&[3.0, 1.0]);
        assert_eq!(truncation_error(&s, 0).unwrap(), 1.0);
        assert_eq!(truncation_error(&s, 2).unwrap(), 0.0);
        assert_eq!(truncation_error(&s, 1).unwrap(), 0.5);
        assert!(truncation_error(&s, 3).is_err());
    }

    #[test]
    fn spectrum_validation() {
        assert!(Spectrum::new(vec![1.0, 2.0]).is_err());
        assert!(Spectrum::new(vec![1.0, -0.1]).is_err());
        let s = Spectrum::from_unsorted(vec![1.0, 3.0, 2.0]).unwrap();
        assert_eq!(s.eigenvalues(), &[3.0, 2.0, 1.0]);
        assert_eq!(s.trace(), 6.0);
        assert_eq!(s.frobenius_sq(), 14.0);
    }

    #[test]
    fn sym_eig_examples() {
        let m = SymMatrix::from_row_major(2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let d = sym_eig(&m, false).unwrap();
        assert_relative_eq!(d.spectrum.eigenvalues()[0], 3.0, max_relative = 1e-14);
        assert_relative_eq!(d.spectrum.eigenvalues()[1], 1.0, max_relative = 1e-14);
        let d = sym_eig(&SymMatrix::identity(6), true).unwrap();
        assert!(d.spectrum.eigenvalues().iter().all(|&x| x == 1.0));
    }

    #[test]
    fn sym_eig_rejects_indefinite_input() {
        let m = SymMatrix::from_row_major(2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(matches!(
            sym_eig(&m, false),
            Err(Error::NotPositiveSemidefinite { .. })
        ));
    }

    #[test]
    fn sym_eig_clamps_rank_deficient_noise() {
        // rank-1 all-ones matrix: n-1 eigenvalues are rounding noise around 0
        let n = 40;
        let m = SymMatrix::from_upper_fn(n, |_, _| 1.0);
        let d = sym_eig(&m, true).unwrap();
        assert_relative_eq!(d.spectrum.eigenvalues()[0], n as f64, max_relative = 1e-13);
        assert!(d.spectrum.eigenvalues()[1..].iter().all(|&x| (0.0..1e-12).contains(&x)));
    }

    #[test]
    fn exponential_matrix_n_under_matches_scan() {
        let k = KernelSpec::new(KernelFamily::Exponential, 1.0).unwrap();
        let m = assemble_index_covariance(&k, 200, &Limits::default()).unwrap();
        let d = sym_eig(&m, false).unwrap();
        let ev = d.spectrum.eigenvalues();
        assert_eq!(n_under(&d.spectrum, 0.1).unwrap(), oracle_n_under(ev, 0.1));
    }

    #[test]
    fn gaussian_interval_n_over_matches_count() {
        let sigma = 0.02;
        let c = build_domain(DomainTag::Interval, Resolution::Spacing(sigma / 4.0), &Limits::default()).unwrap();
        let m = assemble_covariance(
            &KernelSpec::new(KernelFamily::SquaredExponential, sigma).unwrap(),
            &c,
            &Limits::default(),
        )
        .unwrap();
        let d = sym_eig(&m, false).unwrap();
        let count = d.spectrum.eigenvalues().iter().filter(|&&l| l >= 1e-8).count();
        assert_eq!(n_over(&d.spectrum, 1e-4), count);
        let r = ComplexityReport::evaluate(&d.spectrum, 1e-4).unwrap();
        assert!(r.n_over as f64 <= r.upper_bound_nover);
    }

    #[test]
    fn lower_bound_below_measured_for_exponential_matrix() {
        let k = KernelSpec::new(KernelFamily::Exponential, 2.0).unwrap();
        let m = assemble_index_covariance(&k, 500, &Limits::default()).unwrap();
        let d = sym_eig(&m, false).unwrap();
        let r = ComplexityReport::evaluate(&d.spectrum, 0.1).unwrap();
        assert!(r.lower_bound <= r.n_under as f64);
        assert!(r.tail_energy_fraction <= 0.01);
    }

    #[test]
    fn projection_residual_equals_tail() {
        let c = build_domain(DomainTag::Interval, Resolution::Spacing(0.01), &Limits::default()).unwrap();
        let m = assemble_covariance(
            &KernelSpec::new(KernelFamily::Exponential, 0.1).unwrap(),
            &c,
            &Limits::default(),
        )
        .unwrap();
        let d = sym_eig(&m, true).unwrap();
        for count in [0, 1, 5, 20, 60, 100] {
            let from_matrix = projected_tail(&m, &d, count).unwrap();
            let from_spectrum = d.spectrum.tail_sum(count);
            assert!(
                (from_matrix - from_spectrum).abs() <= 1e-8 * d.spectrum.trace(),
                "count {count}: {from_matrix} vs {from_spectrum}"
            );
        }
    }

    #[test]
    fn decay_fit_exact_models() {
        let power: Vec<f64> = (1..=200).map(|n| (n as f64).powi(-3)).collect();
        let f = decay_fit(&spec(&power), DecayModel::Power, 1).unwrap();
        assert!((f.rate - 3.0).abs() < 0.01);
        // e^{-2n} drops below the 1e-14 floor after 16 terms
        let steep: Vec<f64> = (1..=30).map(|n| (-2.0 * n as f64).exp()).collect();
        assert!(matches!(
            decay_fit(&spec(&steep), DecayModel::StretchedExp, 1),
            Err(Error::InsufficientData(_))
        ));
        let exp: Vec<f64> = (1..=80).map(|n| (-0.5 * n as f64).exp()).collect();
        let f = decay_fit(&spec(&exp), DecayModel::StretchedExp, 1).unwrap();
        assert!((f.rate - 0.5).abs() < 0.01);
        assert!(f.r_squared > 0.9999);
        let stretched: Vec<f64> = (1..=400).map(|n| (-2.0 * (n as f64).sqrt()).exp()).collect();
        let f = decay_fit(&spec(&stretched), DecayModel::StretchedExp, 2).unwrap();
        assert!((f.rate - 2.0).abs() < 0.01);
    }

    #[test]
    fn decay_fit_needs_enough_points() {
        let few: Vec<f64> = (1..=10).map(|n| 1.0 / n as f64).collect();
        assert!(matches!(
            decay_fit(&spec(&few), DecayModel::Power, 1),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn gaussian_decay_rate_shrinks_with_sigma() {
        let rates: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&sigma| {
                let c = build_domain(DomainTag::Interval, Resolution::Spacing(sigma / 4.0), &Limits::default()).unwrap();
                let m = assemble_covariance(
                    &KernelSpec::new(KernelFamily::SquaredExponential, sigma).unwrap(),
                    &c,
                    &Limits::default(),
                )
                .unwrap();
                let d = sym_eig(&m, false).unwrap();
                decay_fit(&d.spectrum, DecayModel::StretchedExp, 1).unwrap().rate
            })
            .collect();
        assert!(rates[0] > rates[1] && rates[1] > rates[2], "{rates:?}");
    }

    proptest! {
        #[test]
        fn metrics_monotone_in_eps_and_scale_invariant(
            raw in proptest::collection::vec(0.0f64..10.0, 1..60),
            e1 in 0.01f64..1.0,
            e2 in 0.01f64..1.0,
            scale in 0.01f64..100.0,
        ) {
            prop_assume!(raw.iter().any(|&x| x > 0.0));
            let s = Spectrum::from_unsorted(raw).unwrap();
            let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
            prop_assert!(n_under(&s, lo).unwrap() >= n_under(&s, hi).unwrap());
            prop_assert!(n_over(&s, lo) >= n_over(&s, hi));
            // the scan agrees with an independent head-accumulation
            let k = n_under(&s, lo).unwrap();
            prop_assert!(s.tail_sum(k) <= lo * lo * s.trace());
            if k > 0 {
                prop_assert!(s.tail_sum(k - 1) > lo * lo * s.trace());
            }
            prop_assert!(truncation_error(&s, k).unwrap() <= lo * (1.0 + 1e-12));
            let r = ComplexityReport::evaluate(&s, lo).unwrap();
            prop_assert!(r.n_under <= s.len() && r.n_over <= s.len());
            prop_assert_eq!(n_under(&s.scaled(scale), lo).unwrap(), k);
        }

        #[test]
        fn truncation_error_decreasing(raw in proptest::collection::vec(0.0f64..5.0, 2..40)) {
            prop_assume!(raw.iter().any(|&x| x > 0.0));
            let s = Spectrum::from_unsorted(raw).unwrap();
            let errs: Vec<f64> = (0..=s.len()).map(|k| truncation_error(&s, k).unwrap()).collect();
            prop_assert!(errs.windows(2).all(|w| w[0] >= w[1]));
        }
    }
}
