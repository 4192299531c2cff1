//! Seeded random vector ensembles, their Gram spectra, and truncated
//! Karhunen–Loève field synthesis.
//!
//! A set of `n` vectors in `R^d` is stored as the `d × n` matrix
//! `V = [v_1 … v_n]` in column-major order, so each vector is contiguous.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::cholesky;
use crate::matrix::{Limits, SymMatrix};
use crate::rng;
use crate::spectra::{n_over, n_under, sym_eig, Decomposition, Spectrum};

/// Relative diagonal jitter applied once when Cholesky fails.
pub const CHOLESKY_JITTER: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryDist {
    /// Standard normal entries.
    Gaussian,
    /// ±1 with equal probability (mean 0, variance 1).
    Rademacher,
}

impl EntryDist {
    pub fn as_str(self) -> &'static str {
        match self {
            EntryDist::Gaussian => "gaussian",
            EntryDist::Rademacher => "rademacher",
        }
    }

    fn draw<R: Rng>(self, rng: &mut R) -> f64 {
        match self {
            EntryDist::Gaussian => rng.sample(StandardNormal),
            EntryDist::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }
}

impl fmt::Display for EntryDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntryDist {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "gaussian" | "normal" => Ok(EntryDist::Gaussian),
            "rademacher" | "bernoulli" => Ok(EntryDist::Rademacher),
            other => Err(format!(
                "unknown distribution `{other}` (expected gaussian or rademacher)"
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    pub n: usize,
    pub d: usize,
    pub dist: EntryDist,
    pub seed: u64,
    /// Population covariance between the `n` vectors (n × n, SPD).
    pub covariance: Option<SymMatrix>,
}

impl EnsembleSpec {
    pub fn iid(n: usize, d: usize, dist: EntryDist, seed: u64) -> Self {
        Self {
            n,
            d,
            dist,
            seed,
            covariance: None,
        }
    }

    pub fn with_covariance(mut self, c: SymMatrix) -> Self {
        self.covariance = Some(c);
        self
    }

    /// Checks sizes against `limits` and the covariance shape.
    pub fn check(&self, limits: &Limits) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(invalid("n, d", "both must be at least 1"));
        }
        limits.check(self.n)?;
        let entries = self.n.checked_mul(self.d).ok_or(Error::MemoryCap {
            requested: usize::MAX,
            cap: limits.max_points,
        })?;
        // the d × n sample matrix may not exceed the n × n budget
        let cap_entries = limits.max_points.saturating_mul(limits.max_points);
        if entries > cap_entries {
            return Err(Error::MemoryCap {
                requested: entries,
                cap: cap_entries,
            });
        }
        if let Some(c) = &self.covariance {
            if c.n() != self.n {
                return Err(invalid(
                    "covariance",
                    format!("expected {0}x{0}, got {1}x{1}", self.n, c.n()),
                ));
            }
        }
        Ok(())
    }
}

/// `n` vectors in `R^d`, column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorSet {
    d: usize,
    n: usize,
    data: Vec<f64>,
}

impl VectorSet {
    pub fn from_columns(d: usize, n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != d * n {
            return Err(invalid(
                "data",
                format!("expected {} entries, got {}", d * n, data.len()),
            ));
        }
        Ok(Self { d, n, data })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Vector `i`.
    pub fn column(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            d: self.d,
            n: self.n,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }
}

/// `d × n` matrix of i.i.d. entries; column `i` comes from stream `i`.
fn iid_matrix(n: usize, d: usize, dist: EntryDist, seed: u64) -> Vec<f64> {
    let mut data = vec![0.0; n * d];
    data.par_chunks_mut(d).enumerate().for_each(|(i, col)| {
        let mut r = rng::stream(seed, i as u64);
        for x in col.iter_mut() {
            *x = dist.draw(&mut r);
        }
    });
    data
}

/// Vectors with i.i.d. entries.
pub fn sample_iid(spec: &EnsembleSpec, limits: &Limits) -> Result<VectorSet> {
    spec.check(limits)?;
    if spec.covariance.is_some() {
        return Err(invalid(
            "covariance",
            "use sample_correlated for ensembles with a covariance",
        ));
    }
    VectorSet::from_columns(spec.d, spec.n, iid_matrix(spec.n, spec.d, spec.dist, spec.seed))
}

/// Cholesky factor of `c`, retrying once with `1e-12 · tr(c)/n` added to
/// the diagonal.
pub fn cholesky_with_jitter(c: &SymMatrix) -> Result<Vec<f64>> {
    match cholesky(c) {
        Ok(l) => Ok(l),
        Err(_) => {
            let mut shifted = c.clone();
            shifted.add_diagonal(CHOLESKY_JITTER * c.trace() / c.n() as f64);
            cholesky(&shifted).map_err(|(pivot, value)| Error::Cholesky { pivot, value })
        }
    }
}

/// Vectors `V = X Lᵀ` with `X` i.i.d. and `C = L Lᵀ`, so that
/// `E[(1/d) VᵀV] = C`.
pub fn sample_correlated(spec: &EnsembleSpec, limits: &Limits) -> Result<VectorSet> {
    spec.check(limits)?;
    let c = spec
        .covariance
        .as_ref()
        .ok_or_else(|| invalid("covariance", "sample_correlated needs a covariance"))?;
    let (n, d) = (spec.n, spec.d);
    let l = cholesky_with_jitter(c)?;
    let x = iid_matrix(n, d, spec.dist, spec.seed);
    let mut data = vec![0.0; n * d];
    // column i of V = Σ_{j ≤ i} L[i][j] · column j of X
    data.par_chunks_mut(d).enumerate().for_each(|(i, col)| {
        for j in 0..=i {
            let lij = l[i * n + j];
            if lij == 0.0 {
                continue;
            }
            for (v, xv) in col.iter_mut().zip(&x[j * d..(j + 1) * d]) {
                *v += lij * xv;
            }
        }
    });
    VectorSet::from_columns(d, n, data)
}

/// Draws either an i.i.d. or a correlated ensemble depending on the spec.
pub fn sample(spec: &EnsembleSpec, limits: &Limits) -> Result<VectorSet> {
    if spec.covariance.is_some() {
        sample_correlated(spec, limits)
    } else {
        sample_iid(spec, limits)
    }
}

/// Spectrum of the normalized Gram matrix `Â = (1/d) VᵀV`.
#[derive(Debug, Clone)]
pub struct GramResult {
    pub n: usize,
    pub d: usize,
    /// `(1/d) Σ ‖v_i‖²`.
    pub trace_hat: f64,
    pub decomposition: Decomposition,
}

impl GramResult {
    pub fn spectrum(&self) -> &Spectrum {
        &self.decomposition.spectrum
    }

    /// Descending eigenvalues of `Â`.
    pub fn eigenvalues_hat(&self) -> &[f64] {
        self.spectrum().eigenvalues()
    }
}

/// `(1/d) VᵀV`.
pub fn gram_matrix(v: &VectorSet) -> SymMatrix {
    let inv_d = 1.0 / v.d() as f64;
    SymMatrix::from_upper_fn(v.n(), |i, j| {
        v.column(i)
            .iter()
            .zip(v.column(j))
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * inv_d
    })
}

pub fn gram_spectrum(v: &VectorSet) -> Result<GramResult> {
    if v.n() == 0 || v.d() == 0 {
        return Err(invalid("vectors", "vector set is empty"));
    }
    let g = gram_matrix(v);
    let trace_hat = g.trace();
    let decomposition = sym_eig(&g, false)?;
    Ok(GramResult {
        n: v.n(),
        d: v.d(),
        trace_hat,
        decomposition,
    })
}

/// Least dimension of a subspace that relatively r.m.s. ε-embeds the
/// vectors. Scale invariant, so `Â` and `VᵀV` give the same answer.
pub fn empirical_embedding_dim(g: &GramResult, eps: f64) -> Result<usize> {
    n_under(g.spectrum(), eps)
}

/// Number of eigenvalues `λ` of the unnormalized `VᵀV` with `√λ ≥ ε`.
pub fn empirical_eps_rank(g: &GramResult, eps: f64) -> usize {
    n_over(&g.spectrum().scaled(g.d as f64), eps)
}

/// Realizations of the centred field `Σ_{k<n_terms} √λ_k e_k Y_k` with
/// `Y_k` i.i.d. standard normal. Sample `s` uses stream `s` of `seed`.
/// Returns `n_samples` rows of length `n` (one value per point).
pub fn sample_kl_field(dec: &Decomposition, n_terms: usize, n_samples: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let n = dec.n();
    if dec.vectors.is_none() {
        return Err(invalid("decomposition", "eigenvectors are required"));
    }
    if n_terms > n {
        return Err(invalid(
            "n_terms",
            format!("{n_terms} exceeds the {n} available eigenpairs"),
        ));
    }
    let amplitudes: Vec<f64> = dec.spectrum.eigenvalues()[..n_terms]
        .iter()
        .map(|l| l.sqrt())
        .collect();
    Ok((0..n_samples)
        .into_par_iter()
        .map(|s| {
            let mut r = rng::stream(seed, s as u64);
            let mut field = vec![0.0; n];
            for (k, amp) in amplitudes.iter().enumerate() {
                let y: f64 = r.sample(StandardNormal);
                let coef = amp * y;
                let e = dec.vector(k).expect("vectors present");
                for (f, ek) in field.iter_mut().zip(e) {
                    *f += coef * ek;
                }
            }
            field
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{
        assemble_covariance, assemble_index_covariance, build_domain, DomainTag, KernelFamily,
        KernelSpec, Resolution,
    };
    use crate::mplaw::MPParams;
    use crate::spectra::lower_bound;

    fn lim() -> Limits {
        Limits::default()
    }

    #[test]
    fn rademacher_entries_are_signs() {
        let v = sample_iid(&EnsembleSpec::iid(3, 2, EntryDist::Rademacher, 11), &lim()).unwrap();
        assert!(v.as_slice().iter().all(|&x| x == 1.0 || x == -1.0));
    }

    #[test]
    fn sampling_is_deterministic() {
        for dist in [EntryDist::Gaussian, EntryDist::Rademacher] {
            let spec = EnsembleSpec::iid(20, 30, dist, 99);
            let a = sample_iid(&spec, &lim()).unwrap();
            let b = sample_iid(&spec, &lim()).unwrap();
            assert!(a.as_slice().iter().zip(b.as_slice()).all(|(x, y)| x.to_bits() == y.to_bits()));
            let other = sample_iid(&EnsembleSpec::iid(20, 30, dist, 100), &lim()).unwrap();
            assert_ne!(a, other);
        }
    }

    #[test]
    fn gaussian_moments() {
        let v = sample_iid(&EnsembleSpec::iid(500, 2000, EntryDist::Gaussian, 5), &lim()).unwrap();
        let xs = v.as_slice();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64;
        assert!(m.abs() <= 0.01, "mean {m}");
        assert!((0.97..=1.03).contains(&var), "var {var}");
    }

    #[test]
    fn identity_covariance_reproduces_iid() {
        let spec = EnsembleSpec::iid(15, 40, EntryDist::Gaussian, 3);
        let iid = sample_iid(&spec, &lim()).unwrap();
        let cor = sample_correlated(&spec.clone().with_covariance(SymMatrix::identity(15)), &lim()).unwrap();
        assert_eq!(iid, cor);
    }

    #[test]
    fn scalar_covariance_scales_variance() {
        let c = SymMatrix::from_row_major(1, vec![4.0]).unwrap();
        let spec = EnsembleSpec::iid(1, 20_000, EntryDist::Gaussian, 8).with_covariance(c);
        let v = sample_correlated(&spec, &lim()).unwrap();
        let var = v.as_slice().iter().map(|x| x * x).sum::<f64>() / 20_000.0;
        assert!((var - 4.0).abs() < 0.15, "{var}");
    }

    #[test]
    fn correlated_gram_concentrates_on_covariance() {
        let (n, d) = (200, 800);
        let k = KernelSpec::new(KernelFamily::Exponential, 10.0).unwrap();
        let c = assemble_index_covariance(&k, n, &lim()).unwrap();
        let spec = EnsembleSpec::iid(n, d, EntryDist::Gaussian, 21).with_covariance(c.clone());
        let g = gram_matrix(&sample_correlated(&spec, &lim()).unwrap());
        let margin = 5.0 * (2.0 / d as f64).sqrt();
        for i in 0..n {
            assert!((g.get(i, i) - c.get(i, i)).abs() <= margin, "diag {i}: {}", g.get(i, i));
        }
    }

    #[test]
    fn jitter_rescues_semidefinite_covariance() {
        let k = KernelSpec::new(KernelFamily::SquaredExponential, 0.2).unwrap();
        let cloud = build_domain(DomainTag::Interval, Resolution::Spacing(0.01), &lim()).unwrap();
        let c = assemble_covariance(&k, &cloud, &lim()).unwrap();
        // numerically singular: plain Cholesky breaks down
        assert!(cholesky(&c).is_err());
        assert!(cholesky_with_jitter(&c).is_ok());
        let bad = SymMatrix::from_row_major(2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(matches!(cholesky_with_jitter(&bad), Err(Error::Cholesky { .. })));
    }

    #[test]
    fn gram_of_orthogonal_columns() {
        let d = 4;
        let mut data = vec![0.0; d * d];
        for i in 0..d {
            data[i * d + i] = 2.0; // norm² = 4 = d
        }
        let g = gram_spectrum(&VectorSet::from_columns(d, d, data).unwrap()).unwrap();
        assert!(g.eigenvalues_hat().iter().all(|&x| (x - 1.0).abs() < 1e-15));
        let single = VectorSet::from_columns(3, 1, vec![1.0, 2.0, 2.0]).unwrap();
        let g = gram_spectrum(&single).unwrap();
        assert!((g.eigenvalues_hat()[0] - 3.0).abs() < 1e-15);
        assert_eq!(g.trace_hat, 3.0);
    }

    #[test]
    fn embedding_dim_on_uniform_spectrum() {
        let d = 100;
        let mut data = vec![0.0; d * d];
        for i in 0..d {
            data[i * d + i] = 1.0;
        }
        let g = gram_spectrum(&VectorSet::from_columns(d, d, data).unwrap()).unwrap();
        assert_eq!(empirical_embedding_dim(&g, 1.0).unwrap(), 0);
        assert_eq!(empirical_embedding_dim(&g, 0.1).unwrap(), 99);
        assert!(matches!(
            empirical_embedding_dim(
                &gram_spectrum(&VectorSet::from_columns(2, 2, vec![0.0; 4]).unwrap()).unwrap(),
                0.5
            ),
            Err(Error::ZeroTrace)
        ));
    }

    #[test]
    fn gram_edge_near_mp_edge_and_bounds_hold() {
        let v = sample_iid(&EnsembleSpec::iid(500, 2000, EntryDist::Gaussian, 2024), &lim()).unwrap();
        let g = gram_spectrum(&v).unwrap();
        let edge = MPParams::new(1.0, 0.25).unwrap().lambda_plus();
        let top = g.eigenvalues_hat()[0];
        assert!(top >= 0.9 * edge && top <= 1.15 * edge, "{top}");
        let s = g.spectrum();
        for eps in [0.05, 0.1, 0.2, 0.5] {
            let nu = empirical_embedding_dim(&g, eps).unwrap();
            assert!(nu as f64 >= lower_bound(s.trace(), s.frobenius_sq(), eps));
            let scaled = gram_spectrum(&v.scaled(3.7)).unwrap();
            assert_eq!(empirical_embedding_dim(&scaled, eps).unwrap(), nu);
        }
    }

    #[test]
    fn kl_field_edge_cases() {
        let k = KernelSpec::new(KernelFamily::SquaredExponential, 0.2).unwrap();
        let cloud = build_domain(DomainTag::Interval, Resolution::Spacing(0.02), &lim()).unwrap();
        let m = assemble_covariance(&k, &cloud, &lim()).unwrap();
        let dec = sym_eig(&m, true).unwrap();
        let zero = sample_kl_field(&dec, 0, 3, 1).unwrap();
        assert!(zero.iter().flatten().all(|&x| x == 0.0));
        assert!(sample_kl_field(&dec, 51, 3, 1).is_err());
        let no_vec = sym_eig(&m, false).unwrap();
        assert!(sample_kl_field(&no_vec, 1, 1, 1).is_err());
    }
}
