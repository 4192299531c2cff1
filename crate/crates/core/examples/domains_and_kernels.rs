//! The three domains and three kernel profiles. Shows grid sizes, the
//! Fibonacci lattice spacing on the sphere, and how the profile changes the
//! number of terms needed at a fixed tolerance.
//!
//! cargo run --release --example domains_and_kernels

use kl_complexity::kernels::{assemble_covariance, build_domain, sphere_count_for_spacing};
use kl_complexity::spectra::{n_under, sym_eig};
use kl_complexity::{DomainTag, KernelFamily, KernelSpec, Limits, Resolution};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let limits = Limits::default();

    for h in [0.2, 0.1, 0.05] {
        let n = sphere_count_for_spacing(h)?;
        let cloud = build_domain(DomainTag::Sphere, Resolution::Spacing(h), &limits)?;
        println!("sphere: target h = {h:<5} -> {n:>5} points, measured h = {:.4}", cloud.h());
    }

    let sigma = 0.3;
    let eps = 0.05;
    println!("\nn_under at eps = {eps}, sigma = {sigma}, h = sigma/4:");
    for domain in [DomainTag::Interval, DomainTag::Square, DomainTag::Sphere] {
        let cloud = build_domain(domain, Resolution::Spacing(sigma / 4.0), &limits)?;
        print!("  {domain:<8} (n = {:>4})", cloud.len());
        for family in [
            KernelFamily::SquaredExponential,
            KernelFamily::SquaredExponentialHalf,
            KernelFamily::Exponential,
        ] {
            let c = assemble_covariance(&KernelSpec::new(family, sigma)?, &cloud, &limits)?;
            let k = n_under(&sym_eig(&c, false)?.spectrum, eps)?;
            print!("  {family}: {k:>4}");
        }
        println!();
    }
    Ok(())
}
