//! Intrinsic complexity of random fields and random vector ensembles from
//! their second-order statistics.
//!
//! The crate measures how many Karhunen–Loève terms a covariance needs to
//! reach a relative r.m.s. tolerance `ε`, compares those counts against
//! universal trace/Frobenius bounds, and evaluates the asymptotic answers
//! available for random vectors with i.i.d. entries (Marčenko–Pastur) and
//! for the exponential covariance matrix (closed-form spectrum).
//!
//! | module | contents |
//! |--------|----------|
//! | [`kernels`] | kernel families, discretized domains, dense covariance assembly |
//! | [`spectra`] | symmetric eigensolver wrapper, `n_under`/`n_over`, bounds, decay fits |
//! | [`mplaw`] | Marčenko–Pastur density, partial moments, `ρ(ε)`, ε-rank and best-k error |
//! | [`expanalytic`] | analytic spectrum of `exp(−τ|i−j|)` and its limiting ratio |
//! | [`ensembles`] | seeded i.i.d./correlated ensembles, Gram spectra, KL field samples |
//! | [`harness`] | resolution, σ and ε sweeps; MP and exponential-covariance comparisons |
//! | [`cli`] | command-line front end and table output |
//!
//! Runnable walkthroughs live in `crates/core/examples/`:
//!
//! ```bash
//! cargo run --release -p kl-complexity --example kl_truncation
//! cargo run --release -p kl-complexity --example marchenko_pastur
//! cargo run --release -p kl-complexity --example exponential_covariance
//! ```

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod ensembles;
pub mod error;
pub mod expanalytic;
pub mod harness;
pub mod kernels;
pub mod linalg;
pub mod matrix;
pub mod mplaw;
pub mod quad;
pub mod rng;
pub mod spectra;
pub mod table;

pub use error::{Error, Result};
pub use kernels::{DomainTag, KernelFamily, KernelSpec, Limits, PointCloud, Resolution, SymMatrix};
pub use spectra::{ComplexityReport, Spectrum};

/// Crate version, embedded in every output table.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
