//! Monte Carlo checks on sampled fields and ensembles at fixed seeds.

use kl_complexity::ensembles::{
    empirical_embedding_dim, gram_spectrum, sample, sample_kl_field, EnsembleSpec, EntryDist,
};
use kl_complexity::kernels::{assemble_covariance, build_domain};
use kl_complexity::mplaw::{asymptotic_ratio, MPParams};
use kl_complexity::spectra::{lower_bound, sym_eig};
use kl_complexity::{DomainTag, KernelFamily, KernelSpec, Limits, Resolution};

fn field_setup() -> (kl_complexity::SymMatrix, kl_complexity::spectra::Decomposition) {
    let limits = Limits::default();
    let cloud = build_domain(DomainTag::Interval, Resolution::Spacing(0.02), &limits).unwrap();
    assert_eq!(cloud.len(), 50);
    let k = KernelSpec::new(KernelFamily::SquaredExponential, 0.2).unwrap();
    let c = assemble_covariance(&k, &cloud, &limits).unwrap();
    let dec = sym_eig(&c, true).unwrap();
    (c, dec)
}

#[test]
fn full_expansion_reproduces_the_covariance() {
    let (c, dec) = field_setup();
    let n = c.n();
    let samples = sample_kl_field(&dec, n, 2000, 42).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let cov = samples.iter().map(|s| s[i] * s[j]).sum::<f64>() / samples.len() as f64;
            worst = worst.max((cov - c.get(i, j)).abs());
        }
    }
    assert!(worst <= 0.15, "largest covariance deviation {worst}");
}

#[test]
fn single_term_variance_follows_leading_mode() {
    let (_, dec) = field_setup();
    let samples = sample_kl_field(&dec, 1, 4000, 5).unwrap();
    let l1 = dec.spectrum.eigenvalues()[0];
    let e1 = dec.vector(0).unwrap();
    for i in [0, 12, 25, 49] {
        let var = samples.iter().map(|s| s[i] * s[i]).sum::<f64>() / samples.len() as f64;
        let expect = l1 * e1[i] * e1[i];
        // standard error of a chi-square(1) mean over 4000 draws is ~2.2%
        assert!((var - expect).abs() <= 0.1 * expect, "point {i}: {var} vs {expect}");
    }
}

#[test]
fn zero_terms_give_a_zero_field() {
    let (_, dec) = field_setup();
    let s = sample_kl_field(&dec, 0, 3, 1).unwrap();
    assert!(s.iter().flatten().all(|&v| v == 0.0));
}

#[test]
fn field_samples_are_seed_deterministic() {
    let (_, dec) = field_setup();
    assert_eq!(sample_kl_field(&dec, 10, 5, 9).unwrap(), sample_kl_field(&dec, 10, 5, 9).unwrap());
    assert_ne!(sample_kl_field(&dec, 10, 5, 9).unwrap(), sample_kl_field(&dec, 10, 5, 10).unwrap());
}

#[test]
fn gaussian_embedding_within_two_percent_of_prediction() {
    let p = MPParams::new(1.0, 0.25).unwrap();
    let v = sample(&EnsembleSpec::iid(500, 2000, EntryDist::Gaussian, 77), &Limits::default()).unwrap();
    let g = gram_spectrum(&v).unwrap();
    let k = empirical_embedding_dim(&g, 0.1).unwrap() as f64;
    let pred = 500.0 * asymptotic_ratio(0.1, &p).unwrap();
    assert!((k - pred).abs() <= 0.02 * pred, "{k} vs {pred}");
}

#[test]
fn embedding_is_scale_invariant_and_bounded() {
    let v = sample(&EnsembleSpec::iid(120, 60, EntryDist::Rademacher, 3), &Limits::default()).unwrap();
    let a = gram_spectrum(&v).unwrap();
    let b = gram_spectrum(&v.scaled(37.5)).unwrap();
    for eps in [0.05, 0.2, 0.5] {
        let ka = empirical_embedding_dim(&a, eps).unwrap();
        assert_eq!(ka, empirical_embedding_dim(&b, eps).unwrap());
        let s = a.spectrum();
        assert!(ka as f64 >= lower_bound(s.trace(), s.frobenius_sq(), eps));
    }
}
