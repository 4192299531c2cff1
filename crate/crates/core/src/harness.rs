//! Experiment sweeps over kernels, domains, resolutions and tolerances.
//!
//! Each sweep point is independent and runs on the rayon pool; results are
//! collected in the declared sweep order. Random experiments derive one seed
//! per row from the master seed, so the output does not depend on the
//! number of threads. Every row passes through
//! [`ComplexityReport::evaluate`], which fails hard on a bound violation.

use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{
    empirical_embedding_dim, empirical_eps_rank, gram_spectrum, sample, sample_kl_field, EnsembleSpec, EntryDist,
};
use crate::error::{invalid, Error, Result};
use crate::expanalytic::{asymptotic_t, solve_thetas};
use crate::kernels::{
    assemble_covariance, assemble_index_covariance, build_domain, DomainTag, KernelFamily, KernelSpec, PointCloud,
    Resolution,
};
use crate::matrix::{Limits, SymMatrix};
use crate::mplaw::{asymptotic_eps_rank_ratio, asymptotic_ratio, MPParams};
use crate::rng::derive_seed;
use crate::spectra::{least_squares, n_under, sym_eig, upper_bound_nover, ComplexityReport, Decomposition};
use crate::table::{Cell, Table};

/// Fewest sweep points a fit is computed from.
pub const MIN_FIT_POINTS: usize = 4;

/// Shared knobs for every sweep.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub limits: Limits,
    /// Record wall-clock time per sweep point. Off by default because it
    /// makes output tables differ between runs.
    pub timing: bool,
}

/// Discretization of a domain relative to the correlation length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grid {
    /// `r` points per `σ`, i.e. spacing `h = σ/r`.
    PointsPerSigma(f64),
    /// Absolute spacing `h`.
    Spacing(f64),
}

impl Grid {
    fn spacing(self, sigma: f64) -> f64 {
        match self {
            Grid::PointsPerSigma(r) => sigma / r,
            Grid::Spacing(h) => h,
        }
    }

    fn validate(self) -> Result<()> {
        match self {
            Grid::PointsPerSigma(r) if !(r.is_finite() && r > 0.0) => {
                Err(invalid("r", format!("must be positive, got {r}")))
            }
            Grid::Spacing(h) if !(h.is_finite() && h > 0.0) => Err(invalid("h", format!("must be positive, got {h}"))),
            _ => Ok(()),
        }
    }
}

/// One `(kernel, domain, σ, resolution, ε)` measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub experiment: String,
    pub kernel: KernelFamily,
    pub domain: DomainTag,
    pub sigma: f64,
    /// Points per `σ` actually realized, `σ/h`.
    pub r: f64,
    pub h: f64,
    pub eps: f64,
    pub n: usize,
    pub n_under: usize,
    pub n_over: usize,
    pub lower_bound: f64,
    pub upper_bound_nover: f64,
    pub trace_residual: f64,
    pub frobenius_residual: f64,
    pub wall_time: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// `ln y = slope · ln x + intercept`.
    LogLogLinear,
    /// `ln y = slope · ln|ln ε| + intercept`; the slope estimates the
    /// polylogarithmic exponent.
    LogVsLogLog,
    /// `y = slope · |ln ε|^d + intercept`.
    PolylogLinear,
}

impl FitModel {
    pub fn as_str(self) -> &'static str {
        match self {
            FitModel::LogLogLinear => "log_log_linear",
            FitModel::LogVsLogLog => "log_vs_loglog",
            FitModel::PolylogLinear => "polylog_linear",
        }
    }
}

impl fmt::Display for FitModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    /// What was fitted, e.g. `n_under~1/sigma`.
    pub target: String,
    /// Tolerance the fitted counts were taken at, if fixed.
    pub eps: Option<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

fn fit(model: FitModel, target: &str, eps: Option<f64>, xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    if xs.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData(format!(
            "{target}: {} usable points, need {MIN_FIT_POINTS}",
            xs.len()
        )));
    }
    let line = least_squares(xs, ys);
    Ok(FitResult {
        model,
        target: target.to_owned(),
        eps,
        slope: line.slope,
        intercept: line.intercept,
        r_squared: line.r_squared,
        points: xs.len(),
    })
}

/// Log–log fit of `y` against `x`, dropping points where either is zero.
pub fn log_log_fit(target: &str, eps: Option<f64>, xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .unzip();
    fit(FitModel::LogLogLinear, target, eps, &lx, &ly)
}

fn check_eps_list(eps: &[f64]) -> Result<()> {
    if eps.is_empty() {
        return Err(invalid("eps", "at least one tolerance is required"));
    }
    if let Some(e) = eps.iter().find(|e| !(**e > 0.0 && **e <= 1.0)) {
        return Err(invalid("eps", format!("every value must lie in (0, 1], got {e}")));
    }
    Ok(())
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(invalid("sigma", format!("must be positive, got {sigma}")));
    }
    Ok(())
}

/// Point cloud for `domain` at spacing `h`.
pub fn discretize(domain: DomainTag, h: f64, limits: &Limits) -> Result<PointCloud> {
    build_domain(domain, Resolution::Spacing(h), limits)
}

/// Kernel matrix on `domain` discretized by `grid`, with its point cloud.
pub fn kernel_matrix(
    kernel: KernelFamily,
    domain: DomainTag,
    sigma: f64,
    grid: Grid,
    limits: &Limits,
) -> Result<(PointCloud, SymMatrix)> {
    check_sigma(sigma)?;
    grid.validate()?;
    let spec = KernelSpec::new(kernel, sigma)?;
    let cloud = discretize(domain, grid.spacing(sigma), limits)?;
    let c = assemble_covariance(&spec, &cloud, limits)?;
    Ok((cloud, c))
}

/// Complexity rows for one kernel matrix, one per tolerance.
pub fn complexity_rows(
    experiment: &str,
    kernel: KernelFamily,
    domain: DomainTag,
    sigma: f64,
    grid: Grid,
    eps_list: &[f64],
    opts: &RunOptions,
) -> Result<Vec<SweepRow>> {
    check_eps_list(eps_list)?;
    let start = Instant::now();
    let (cloud, c) = kernel_matrix(kernel, domain, sigma, grid, &opts.limits)?;
    let dec = sym_eig(&c, false)?;
    let reports = eps_list
        .iter()
        .map(|&eps| ComplexityReport::evaluate(&dec.spectrum, eps))
        .collect::<Result<Vec<_>>>()?;
    let wall_time = opts.timing.then(|| start.elapsed().as_secs_f64());
    Ok(reports
        .into_iter()
        .map(|rep| SweepRow {
            experiment: experiment.to_owned(),
            kernel,
            domain,
            sigma,
            r: sigma / cloud.h(),
            h: cloud.h(),
            eps: rep.eps,
            n: cloud.len(),
            n_under: rep.n_under,
            n_over: rep.n_over,
            lower_bound: rep.lower_bound,
            upper_bound_nover: rep.upper_bound_nover,
            trace_residual: dec.trace_residual,
            frobenius_residual: dec.frobenius_residual,
            wall_time,
        })
        .collect())
}

fn run_points<T, F>(points: &[T], f: F) -> Result<Vec<SweepRow>>
where
    T: Sync,
    F: Fn(&T) -> Result<Vec<SweepRow>> + Sync + Send,
{
    let groups = points.par_iter().map(f).collect::<Result<Vec<_>>>()?;
    Ok(groups.into_iter().flatten().collect())
}

/// `n_under`/`n_over` as the resolution `r = σ/h` is refined at fixed `σ`.
pub fn resolution_sweep(
    kernel: KernelFamily,
    domain: DomainTag,
    sigma: f64,
    r_list: &[f64],
    eps_list: &[f64],
    opts: &RunOptions,
) -> Result<Vec<SweepRow>> {
    check_sigma(sigma)?;
    check_eps_list(eps_list)?;
    if r_list.is_empty() {
        return Err(invalid("r", "at least one resolution is required"));
    }
    if let Some(r) = r_list.iter().find(|r| !(**r >= 2.0 && r.is_finite())) {
        return Err(invalid("r", format!("every resolution must be at least 2, got {r}")));
    }
    run_points(r_list, |&r| {
        complexity_rows("sweep-res", kernel, domain, sigma, Grid::PointsPerSigma(r), eps_list, opts)
    })
}

/// Complexity as `σ` shrinks at fixed points per `σ`, with a log–log fit of
/// `n_under` against `1/σ` for every tolerance.
pub fn sigma_sweep(
    kernel: KernelFamily,
    domain: DomainTag,
    grid: Grid,
    sigma_list: &[f64],
    eps_list: &[f64],
    opts: &RunOptions,
) -> Result<(Vec<SweepRow>, Vec<FitResult>)> {
    check_eps_list(eps_list)?;
    grid.validate()?;
    if sigma_list.len() < MIN_FIT_POINTS {
        return Err(invalid(
            "sigma",
            format!("need at least {MIN_FIT_POINTS} values, got {}", sigma_list.len()),
        ));
    }
    for &s in sigma_list {
        check_sigma(s)?;
    }
    let rows = run_points(sigma_list, |&sigma| {
        complexity_rows("sweep-sigma", kernel, domain, sigma, grid, eps_list, opts)
    })?;
    let fits = eps_list
        .iter()
        .map(|&eps| {
            let (xs, ys): (Vec<f64>, Vec<f64>) = rows
                .iter()
                .filter(|r| r.eps == eps)
                .map(|r| (1.0 / r.sigma, r.n_under as f64))
                .unzip();
            log_log_fit("n_under~1/sigma", Some(eps), &xs, &ys)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((rows, fits))
}

/// Complexity over a range of tolerances for one kernel matrix, with fits
/// of `n_under` against `|ln ε|^d` and of `ln n_under` against `ln|ln ε|`.
pub fn eps_sweep(
    kernel: KernelFamily,
    domain: DomainTag,
    sigma: f64,
    grid: Grid,
    eps_list: &[f64],
    opts: &RunOptions,
) -> Result<(Vec<SweepRow>, Vec<FitResult>)> {
    check_eps_list(eps_list)?;
    if eps_list.len() < MIN_FIT_POINTS {
        return Err(invalid(
            "eps",
            format!("need at least {MIN_FIT_POINTS} values, got {}", eps_list.len()),
        ));
    }
    let lo = eps_list.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eps_list.iter().cloned().fold(0.0, f64::max);
    if hi / lo < 100.0 {
        return Err(invalid(
            "eps",
            format!("values must span at least two decades, got [{lo}, {hi}]"),
        ));
    }
    let rows = complexity_rows("sweep-eps", kernel, domain, sigma, grid, eps_list, opts)?;
    let d = domain.dim() as i32;
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .map(|r| (r.eps.ln().abs().powi(d), r.n_under as f64))
        .unzip();
    let mut fits = vec![fit(FitModel::PolylogLinear, "n_under~|ln eps|^d", None, &xs, &ys)?];
    let (lx, ly): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.eps < 1.0 && r.n_under > 0)
        .map(|r| (r.eps.ln().abs().ln(), (r.n_under as f64).ln()))
        .unzip();
    if lx.len() >= MIN_FIT_POINTS {
        fits.push(fit(FitModel::LogVsLogLog, "n_under~|ln eps|", None, &lx, &ly)?);
    }
    Ok((rows, fits))
}

/// Which count an [`MpRow`] compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MpMeasure {
    /// Least embedding dimension against `n·ρ(ε)`.
    Embedding,
    /// ε-rank of `VᵀV` against `n` times its asymptotic ratio.
    EpsRank,
}

impl MpMeasure {
    pub fn as_str(self) -> &'static str {
        match self {
            MpMeasure::Embedding => "embedding",
            MpMeasure::EpsRank => "eps_rank",
        }
    }
}

/// Empirical count from one ensemble realization next to the
/// Marčenko–Pastur prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpRow {
    pub dist: EntryDist,
    pub n: usize,
    pub d: usize,
    pub alpha: f64,
    pub seed: u64,
    pub measure: MpMeasure,
    pub eps: f64,
    pub empirical: usize,
    pub predicted: f64,
    pub abs_gap: f64,
    pub rel_gap: f64,
    /// `max(2, 0.02 n)`, the agreement margin used for single realizations.
    pub margin: f64,
    /// Theorem bound on this count: a lower bound for embeddings, an upper
    /// bound for ε-ranks.
    pub bound: f64,
    pub wall_time: Option<f64>,
}

impl MpRow {
    pub fn within_margin(&self) -> bool {
        self.abs_gap <= self.margin
    }
}

/// Agreement margin for a single realization of size `n`.
pub fn mp_margin(n: usize) -> f64 {
    (0.02 * n as f64).max(2.0)
}

/// Compares ensembles against the Marčenko–Pastur predictions.
#[derive(Debug, Clone)]
pub struct MpComparison {
    pub dist: EntryDist,
    pub n_list: Vec<usize>,
    /// `n/d`; every `n/α` must be an integer.
    pub alpha: f64,
    /// Tolerances for the embedding dimension.
    pub eps_list: Vec<f64>,
    /// Tolerances for the ε-rank of the unnormalized Gram matrix `VᵀV`.
    /// Any positive value is allowed; the interesting range is around
    /// `ε ≈ √(λ d)` for `λ` inside the MP support.
    pub rank_eps_list: Vec<f64>,
    pub seed: u64,
}

impl MpComparison {
    pub fn new(dist: EntryDist, n_list: Vec<usize>, alpha: f64, eps_list: Vec<f64>, seed: u64) -> Self {
        MpComparison {
            dist,
            n_list,
            alpha,
            rank_eps_list: eps_list.clone(),
            eps_list,
            seed,
        }
    }

    pub fn with_rank_eps(mut self, rank_eps: Vec<f64>) -> Self {
        self.rank_eps_list = rank_eps;
        self
    }

    fn ambient_dim(&self, n: usize) -> Result<usize> {
        let d = n as f64 / self.alpha;
        let rounded = d.round();
        if rounded < 1.0 || (d - rounded).abs() > 1e-9 * d.max(1.0) {
            return Err(invalid(
                "alpha",
                format!("n/alpha must be a positive integer, got {n}/{} = {d}", self.alpha),
            ));
        }
        Ok(rounded as usize)
    }
}

pub fn mp_comparison(cfg: &MpComparison, opts: &RunOptions) -> Result<Vec<MpRow>> {
    let params = MPParams::new(1.0, cfg.alpha)?;
    check_eps_list(&cfg.eps_list)?;
    if let Some(e) = cfg.rank_eps_list.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(invalid("rank-eps", format!("every value must be positive, got {e}")));
    }
    if cfg.n_list.is_empty() {
        return Err(invalid("n", "at least one size is required"));
    }
    let dims = cfg
        .n_list
        .iter()
        .map(|&n| {
            let d = cfg.ambient_dim(n)?;
            EnsembleSpec::iid(n, d, cfg.dist, 0).check(&opts.limits)?;
            Ok(d)
        })
        .collect::<Result<Vec<_>>>()?;
    let predicted_embed = cfg
        .eps_list
        .iter()
        .map(|&e| asymptotic_ratio(e, &params))
        .collect::<Result<Vec<_>>>()?;
    let experiment = format!("mp/{}", cfg.dist.as_str());
    let groups = (0..cfg.n_list.len())
        .into_par_iter()
        .map(|i| {
            let start = Instant::now();
            let (n, d) = (cfg.n_list[i], dims[i]);
            let seed = derive_seed(cfg.seed, &experiment, i as u64);
            let v = sample(&EnsembleSpec::iid(n, d, cfg.dist, seed), &opts.limits)?;
            let g = gram_spectrum(&v)?;
            let wall_time = opts.timing.then(|| start.elapsed().as_secs_f64());
            let margin = mp_margin(n);
            let row = |measure, eps, empirical: usize, ratio: f64, bound| {
                let predicted = n as f64 * ratio;
                let abs_gap = (empirical as f64 - predicted).abs();
                MpRow {
                    dist: cfg.dist,
                    n,
                    d,
                    alpha: cfg.alpha,
                    seed,
                    measure,
                    eps,
                    empirical,
                    predicted,
                    abs_gap,
                    rel_gap: if predicted > 0.0 { abs_gap / predicted } else { abs_gap },
                    margin,
                    bound,
                    wall_time,
                }
            };
            let mut rows = Vec::new();
            for (&eps, &ratio) in cfg.eps_list.iter().zip(&predicted_embed) {
                let rep = ComplexityReport::evaluate(g.spectrum(), eps)?;
                debug_assert_eq!(rep.n_under, empirical_embedding_dim(&g, eps)?);
                rows.push(row(MpMeasure::Embedding, eps, rep.n_under, ratio, rep.lower_bound));
            }
            // ε-rank of VᵀV = d·Â; its Frobenius norm scales by d².
            let fro = g.spectrum().frobenius_sq() * (d as f64) * (d as f64);
            for &eps in &cfg.rank_eps_list {
                let rank = empirical_eps_rank(&g, eps);
                let ub = upper_bound_nover(fro, eps);
                if rank as f64 > ub * (1.0 + 1e-12) {
                    return Err(Error::BoundViolated(format!(
                        "eps-rank {rank} > upper bound {ub} at eps = {eps}"
                    )));
                }
                let ratio = asymptotic_eps_rank_ratio(eps, d, &params)?;
                rows.push(row(MpMeasure::EpsRank, eps, rank, ratio, ub));
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(groups.into_iter().flatten().collect())
}

/// Exponential covariance `exp(−τ|i−j|)` on `n` index points, compared
/// across the closed-form limit, the analytic finite-`n` spectrum, a dense
/// eigendecomposition and a correlated random ensemble.
#[derive(Debug, Clone)]
pub struct ExpComparison {
    pub n_list: Vec<usize>,
    pub tau_list: Vec<f64>,
    pub eps_list: Vec<f64>,
    /// When set, draw `d = round(n · d_over_n)` Gaussian vectors per row with
    /// this covariance and compare their Gram spectrum with the i.i.d. law.
    pub d_over_n: Option<f64>,
    /// Also decompose the dense matrix (`O(n³)`).
    pub dense: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpRow {
    pub n: usize,
    pub tau: f64,
    /// Correlation length in index units, `1/τ`.
    pub sigma: f64,
    pub eps: f64,
    pub t: f64,
    /// Largest analytic eigenvalue.
    pub lambda_1: f64,
    pub analytic_n_under: usize,
    pub analytic_ratio: f64,
    pub lower_bound: f64,
    pub dense_n_under: Option<usize>,
    pub dense_ratio: Option<f64>,
    /// Largest relative difference between analytic and dense eigenvalues.
    pub dense_max_rel_err: Option<f64>,
    pub d: Option<usize>,
    pub ensemble_n_under: Option<usize>,
    pub ensemble_ratio: Option<f64>,
    /// `ρ(ε)` of the i.i.d. law with `α = n/d`.
    pub iid_rho: Option<f64>,
    pub wall_time: Option<f64>,
}

impl ExpRow {
    pub fn analytic_gap(&self) -> f64 {
        (self.analytic_ratio - self.t).abs()
    }

    pub fn ensemble_gap(&self) -> Option<f64> {
        Some((self.ensemble_ratio? - self.iid_rho?).abs())
    }
}

/// Largest `|a_k − b_k| / b_k` over two descending spectra, relative to the
/// top eigenvalue where `b_k` is tiny.
pub fn max_relative_error(a: &[f64], b: &[f64]) -> f64 {
    let top = b.first().copied().unwrap_or(0.0).abs();
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / y.abs().max(top * f64::EPSILON))
        .fold(0.0, f64::max)
}

pub fn exp_kernel_comparison(cfg: &ExpComparison, opts: &RunOptions) -> Result<(Vec<ExpRow>, Vec<FitResult>)> {
    check_eps_list(&cfg.eps_list)?;
    if cfg.n_list.is_empty() || cfg.tau_list.is_empty() {
        return Err(invalid("n, tau", "at least one size and one tau are required"));
    }
    for &n in &cfg.n_list {
        if n == 0 {
            return Err(invalid("n", "must be at least 1"));
        }
        opts.limits.check(n)?;
    }
    if let Some(t) = cfg.tau_list.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(invalid("tau", format!("must be positive, got {t}")));
    }
    if let Some(r) = cfg.d_over_n {
        if !(r > 0.0 && r.is_finite()) {
            return Err(invalid("d-over-n", format!("must be positive, got {r}")));
        }
        for &n in &cfg.n_list {
            let d = ((n as f64) * r).round().max(1.0) as usize;
            EnsembleSpec::iid(n, d, EntryDist::Gaussian, 0).check(&opts.limits)?;
        }
    }
    let points: Vec<(usize, f64)> = cfg
        .n_list
        .iter()
        .flat_map(|&n| cfg.tau_list.iter().map(move |&t| (n, t)))
        .collect();
    let groups = points
        .par_iter()
        .enumerate()
        .map(|(idx, &(n, tau))| exp_point(cfg, opts, idx, n, tau))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<ExpRow> = groups.into_iter().flatten().collect();

    let mut fits = Vec::new();
    if cfg.tau_list.len() >= MIN_FIT_POINTS {
        for &n in &cfg.n_list {
            for &eps in &cfg.eps_list {
                let (xs, ys): (Vec<f64>, Vec<f64>) = rows
                    .iter()
                    .filter(|r| r.n == n && r.eps == eps)
                    .map(|r| (r.tau, r.analytic_n_under as f64))
                    .unzip();
                if let Ok(f) = log_log_fit(&format!("n_under~1/sigma@n={n}"), Some(eps), &xs, &ys) {
                    fits.push(f);
                }
            }
        }
    }
    Ok((rows, fits))
}

fn exp_point(cfg: &ExpComparison, opts: &RunOptions, idx: usize, n: usize, tau: f64) -> Result<Vec<ExpRow>> {
    let start = Instant::now();
    let analytic = solve_thetas(n, tau)?;
    let spectrum = analytic.spectrum();

    let needs_matrix = cfg.dense || cfg.d_over_n.is_some();
    let matrix = if needs_matrix {
        let kernel = KernelSpec::new(KernelFamily::Exponential, 1.0 / tau)?;
        Some(assemble_index_covariance(&kernel, n, &opts.limits)?)
    } else {
        None
    };

    let dense: Option<Decomposition> = match (&matrix, cfg.dense) {
        (Some(c), true) => Some(sym_eig(c, false)?),
        _ => None,
    };
    let dense_err = dense
        .as_ref()
        .map(|dec| max_relative_error(dec.spectrum.eigenvalues(), spectrum.eigenvalues()));

    let ensemble = match (&matrix, cfg.d_over_n) {
        (Some(c), Some(r)) => {
            let d = ((n as f64) * r).round().max(1.0) as usize;
            let seed = derive_seed(cfg.seed, "exp-kernel", idx as u64);
            let spec = EnsembleSpec::iid(n, d, EntryDist::Gaussian, seed).with_covariance(c.clone());
            let g = gram_spectrum(&sample(&spec, &opts.limits)?)?;
            Some((d, g, MPParams::new(1.0, n as f64 / d as f64)?))
        }
        _ => None,
    };
    let wall_time = opts.timing.then(|| start.elapsed().as_secs_f64());

    cfg.eps_list
        .iter()
        .map(|&eps| {
            let rep = ComplexityReport::evaluate(&spectrum, eps)?;
            let dense_n = dense
                .as_ref()
                .map(|dec| ComplexityReport::evaluate(&dec.spectrum, eps).map(|r| r.n_under))
                .transpose()?;
            let (d, ens_n, rho) = match &ensemble {
                Some((d, g, p)) => {
                    let k = ComplexityReport::evaluate(g.spectrum(), eps)?.n_under;
                    (Some(*d), Some(k), Some(asymptotic_ratio(eps, p)?))
                }
                None => (None, None, None),
            };
            Ok(ExpRow {
                n,
                tau,
                sigma: 1.0 / tau,
                eps,
                t: asymptotic_t(eps, tau)?,
                lambda_1: spectrum.eigenvalues()[0],
                analytic_n_under: rep.n_under,
                analytic_ratio: rep.n_under as f64 / n as f64,
                lower_bound: rep.lower_bound,
                dense_n_under: dense_n,
                dense_ratio: dense_n.map(|k| k as f64 / n as f64),
                dense_max_rel_err: dense_err,
                d,
                ensemble_n_under: ens_n,
                ensemble_ratio: ens_n.map(|k| k as f64 / n as f64),
                iid_rho: rho,
                wall_time,
            })
        })
        .collect()
}

/// Eigenvalues of one kernel matrix with cumulative captured variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub k: usize,
    pub lambda: f64,
    /// Relative r.m.s. error of keeping the first `k` terms.
    pub truncation_error: f64,
}

pub fn spectrum_rows(decomposition: &Decomposition) -> Vec<SpectrumRow> {
    let s = &decomposition.spectrum;
    let tr = s.trace();
    s.eigenvalues()
        .iter()
        .enumerate()
        .map(|(i, &lambda)| SpectrumRow {
            k: i + 1,
            lambda,
            truncation_error: (s.tail_sum(i + 1) / tr).max(0.0).sqrt(),
        })
        .collect()
}

/// Realizations of a Gaussian random field with the given kernel, truncated
/// to the fewest KL terms meeting `eps` (or to `terms` if given).
#[derive(Debug, Clone)]
pub struct FieldSample {
    pub cloud: PointCloud,
    pub n_terms: usize,
    /// `samples[s][i]` is sample `s` at point `i`.
    pub samples: Vec<Vec<f64>>,
}

#[allow(clippy::too_many_arguments)]
pub fn field_sample(
    kernel: KernelFamily,
    domain: DomainTag,
    sigma: f64,
    grid: Grid,
    eps: Option<f64>,
    terms: Option<usize>,
    n_samples: usize,
    seed: u64,
    opts: &RunOptions,
) -> Result<FieldSample> {
    let (cloud, c) = kernel_matrix(kernel, domain, sigma, grid, &opts.limits)?;
    let dec = sym_eig(&c, true)?;
    let n_terms = match (terms, eps) {
        (Some(t), _) => t,
        (None, Some(e)) => n_under(&dec.spectrum, e)?,
        (None, None) => dec.n(),
    };
    let samples = sample_kl_field(&dec, n_terms, n_samples, derive_seed(seed, "field-sample", 0))?;
    Ok(FieldSample {
        cloud,
        n_terms,
        samples,
    })
}

/// Conversion of result rows into a [`Table`].
pub trait Tabulate {
    fn columns() -> Vec<&'static str>;
    fn cells(&self) -> Vec<Cell>;

    fn table(rows: &[Self]) -> Table
    where
        Self: Sized,
    {
        let mut t = Table::new(Self::columns());
        for r in rows {
            t.push(r.cells());
        }
        t
    }
}

impl Tabulate for SweepRow {
    fn columns() -> Vec<&'static str> {
        vec![
            "experiment",
            "kernel",
            "domain",
            "sigma",
            "r",
            "h",
            "eps",
            "n",
            "n_under",
            "n_over",
            "lower_bound",
            "upper_bound_nover",
            "trace_residual",
            "frobenius_residual",
            "wall_time",
        ]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            self.experiment.as_str().into(),
            self.kernel.as_str().into(),
            self.domain.as_str().into(),
            self.sigma.into(),
            self.r.into(),
            self.h.into(),
            self.eps.into(),
            self.n.into(),
            self.n_under.into(),
            self.n_over.into(),
            self.lower_bound.into(),
            self.upper_bound_nover.into(),
            self.trace_residual.into(),
            self.frobenius_residual.into(),
            self.wall_time.into(),
        ]
    }
}

impl Tabulate for FitResult {
    fn columns() -> Vec<&'static str> {
        vec!["model", "target", "eps", "slope", "intercept", "r_squared", "points"]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            self.model.as_str().into(),
            self.target.as_str().into(),
            self.eps.into(),
            self.slope.into(),
            self.intercept.into(),
            self.r_squared.into(),
            self.points.into(),
        ]
    }
}

impl Tabulate for MpRow {
    fn columns() -> Vec<&'static str> {
        vec![
            "dist",
            "n",
            "d",
            "alpha",
            "seed",
            "measure",
            "eps",
            "empirical",
            "predicted",
            "abs_gap",
            "rel_gap",
            "margin",
            "bound",
            "wall_time",
        ]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            self.dist.as_str().into(),
            self.n.into(),
            self.d.into(),
            self.alpha.into(),
            self.seed.to_string().into(),
            self.measure.as_str().into(),
            self.eps.into(),
            self.empirical.into(),
            self.predicted.into(),
            self.abs_gap.into(),
            self.rel_gap.into(),
            self.margin.into(),
            self.bound.into(),
            self.wall_time.into(),
        ]
    }
}

impl Tabulate for ExpRow {
    fn columns() -> Vec<&'static str> {
        vec![
            "n",
            "tau",
            "sigma",
            "eps",
            "t",
            "lambda_1",
            "analytic_n_under",
            "analytic_ratio",
            "lower_bound",
            "dense_n_under",
            "dense_ratio",
            "dense_max_rel_err",
            "d",
            "ensemble_n_under",
            "ensemble_ratio",
            "iid_rho",
            "wall_time",
        ]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            self.n.into(),
            self.tau.into(),
            self.sigma.into(),
            self.eps.into(),
            self.t.into(),
            self.lambda_1.into(),
            self.analytic_n_under.into(),
            self.analytic_ratio.into(),
            self.lower_bound.into(),
            self.dense_n_under.into(),
            self.dense_ratio.into(),
            self.dense_max_rel_err.into(),
            self.d.into(),
            self.ensemble_n_under.into(),
            self.ensemble_ratio.into(),
            self.iid_rho.into(),
            self.wall_time.into(),
        ]
    }
}

impl Tabulate for SpectrumRow {
    fn columns() -> Vec<&'static str> {
        vec!["k", "lambda", "truncation_error"]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![self.k.into(), self.lambda.into(), self.truncation_error.into()]
    }
}

impl FieldSample {
    /// Long format: one row per (sample, point) with the point coordinates.
    pub fn table(&self) -> Table {
        let dim = self.cloud.point(0).len();
        let mut cols = vec!["sample".to_owned(), "point".to_owned()];
        cols.extend((0..dim).map(|k| format!("x{k}")));
        cols.push("value".into());
        let mut t = Table::new(cols);
        for (s, field) in self.samples.iter().enumerate() {
            for (i, v) in field.iter().enumerate() {
                let mut row: Vec<Cell> = vec![s.into(), i.into()];
                row.extend(self.cloud.point(i).iter().map(|&x| Cell::from(x)));
                row.push((*v).into());
                t.push(row);
            }
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> RunOptions {
        RunOptions::default()
    }

    #[test]
    fn complexity_rows_one_per_eps() {
        let rows = complexity_rows(
            "t",
            KernelFamily::SquaredExponential,
            DomainTag::Interval,
            0.1,
            Grid::PointsPerSigma(4.0),
            &[0.3, 0.1, 0.03],
            &opts(),
        )
        .unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].n, 40);
        assert!(rows.windows(2).all(|w| w[0].n_under <= w[1].n_under));
        assert!(rows.iter().all(|r| r.wall_time.is_none()));
    }

    #[test]
    fn sigma_sweep_requires_four_points() {
        let err = sigma_sweep(
            KernelFamily::SquaredExponential,
            DomainTag::Interval,
            Grid::PointsPerSigma(4.0),
            &[0.1, 0.05, 0.025],
            &[0.1],
            &opts(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { name: "sigma", .. }));
    }

    #[test]
    fn eps_sweep_rejects_narrow_range() {
        let err = eps_sweep(
            KernelFamily::SquaredExponential,
            DomainTag::Interval,
            0.1,
            Grid::PointsPerSigma(4.0),
            &[0.5, 0.4, 0.3, 0.2],
            &opts(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { name: "eps", .. }));
    }

    #[test]
    fn resolution_rejects_coarse_grid() {
        let err = resolution_sweep(
            KernelFamily::Exponential,
            DomainTag::Interval,
            0.1,
            &[1.0, 2.0],
            &[0.1],
            &opts(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { name: "r", .. }));
    }

    #[test]
    fn mp_rejects_non_integer_dimension() {
        let cfg = MpComparison::new(EntryDist::Gaussian, vec![10], 0.3, vec![0.1], 1);
        assert!(mp_comparison(&cfg, &opts()).is_err());
    }

    #[test]
    fn mp_rows_are_seed_stable() {
        let cfg = MpComparison::new(EntryDist::Rademacher, vec![40, 80], 0.5, vec![0.2, 0.5], 9);
        let a = mp_comparison(&cfg, &opts()).unwrap();
        let b = mp_comparison(&cfg, &opts()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 8);
        assert_eq!(a[0].d, 80);
    }

    #[test]
    fn exp_comparison_small() {
        let cfg = ExpComparison {
            n_list: vec![30],
            tau_list: vec![0.5, 1.0],
            eps_list: vec![0.2],
            d_over_n: Some(2.0),
            dense: true,
            seed: 3,
        };
        let (rows, fits) = exp_kernel_comparison(&cfg, &opts()).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(fits.is_empty());
        for r in &rows {
            assert_eq!(r.dense_n_under, Some(r.analytic_n_under));
            assert!(r.dense_max_rel_err.unwrap() < 1e-10);
            assert_eq!(r.d, Some(60));
        }
    }

    #[test]
    fn field_sample_shape() {
        let f = field_sample(
            KernelFamily::SquaredExponential,
            DomainTag::Square,
            0.3,
            Grid::PointsPerSigma(2.0),
            Some(0.1),
            None,
            3,
            5,
            &opts(),
        )
        .unwrap();
        let t = f.table();
        assert_eq!(t.len(), 3 * f.cloud.len());
        assert_eq!(t.columns(), ["sample", "point", "x0", "x1", "value"]);
    }
}
