//! Draws realizations of a Gaussian random field on the unit square from a
//! truncated KL expansion and compares the sample variance to the kernel.
//!
//! cargo run --release --example field_sampling

use kl_complexity::harness::{field_sample, Grid, RunOptions};
use kl_complexity::{DomainTag, KernelFamily};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let samples = 2000;
    let f = field_sample(
        KernelFamily::SquaredExponential,
        DomainTag::Square,
        0.25,
        Grid::PointsPerSigma(3.0),
        Some(0.05),
        None,
        samples,
        11,
        &RunOptions::default(),
    )?;
    println!("{} points, {} terms kept at eps = 0.05", f.cloud.len(), f.n_terms);

    // unit-variance kernel: pointwise variance of the truncated field is
    // a little below 1, by about eps^2 on average
    let n = f.cloud.len();
    let mean_var: f64 = (0..n)
        .map(|i| f.samples.iter().map(|s| s[i] * s[i]).sum::<f64>() / samples as f64)
        .sum::<f64>()
        / n as f64;
    println!("mean pointwise variance over {samples} samples: {mean_var:.4}");

    let first = &f.samples[0];
    let (lo, hi) = first.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    println!("first realization ranges over [{lo:.3}, {hi:.3}]");
    Ok(())
}
