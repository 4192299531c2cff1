//! How many Karhunen–Loève terms does a Gaussian-kernel field on [0, 1]
//! need? Prints the leading eigenvalues, then the truncation counts and the
//! trace/Frobenius bounds for a few tolerances.
//!
//! cargo run --release --example kl_truncation

use kl_complexity::kernels::{assemble_covariance, build_domain};
use kl_complexity::spectra::{sym_eig, truncation_error};
use kl_complexity::{ComplexityReport, DomainTag, KernelFamily, KernelSpec, Limits, Resolution};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let limits = Limits::default();
    let sigma = 0.05;
    let kernel = KernelSpec::new(KernelFamily::SquaredExponential, sigma)?;
    // four grid points per correlation length
    let cloud = build_domain(DomainTag::Interval, Resolution::Spacing(sigma / 4.0), &limits)?;
    let c = assemble_covariance(&kernel, &cloud, &limits)?;
    let dec = sym_eig(&c, false)?;
    let s = &dec.spectrum;

    println!("n = {}, h = {}, trace = {}", cloud.len(), cloud.h(), s.trace());
    println!("trace residual {:.1e}, frobenius residual {:.1e}", dec.trace_residual, dec.frobenius_residual);
    for (k, l) in s.eigenvalues().iter().take(8).enumerate() {
        println!("  lambda_{:<2} = {l:.6e}", k + 1);
    }

    println!("\n{:>6} {:>8} {:>8} {:>12} {:>12}", "eps", "n_under", "n_over", "lower", "error");
    for eps in [0.3, 0.1, 0.05, 0.01, 0.001] {
        let rep = ComplexityReport::evaluate(s, eps)?;
        let err = truncation_error(s, rep.n_under)?;
        println!(
            "{eps:>6} {:>8} {:>8} {:>12.3} {:>12.3e}",
            rep.n_under, rep.n_over, rep.lower_bound, err
        );
    }
    Ok(())
}
