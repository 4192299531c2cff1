//! The Marchenko–Pastur law as a source of embedding predictions: support,
//! the ratio rho(eps), its quantile and slope, and the inverse map from a
//! subspace dimension back to its error.
//!
//! cargo run --release --example marchenko_pastur

use kl_complexity::mplaw::{
    asymptotic_ratio, best_k_error, cumulative_mass, rho_derivative, solve_quantile, MPParams,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for alpha in [0.25, 1.0, 4.0] {
        let p = MPParams::new(1.0, alpha)?;
        println!(
            "alpha = {alpha}: support [{:.4}, {:.4}], atom at zero {:.3}, mass below 1 = {:.6}",
            p.lambda_minus(),
            p.lambda_plus(),
            p.atom(),
            cumulative_mass(1.0, &p)
        );
        for eps in [0.3, 0.1, 0.01] {
            let rho = asymptotic_ratio(eps, &p)?;
            let y = solve_quantile(eps, &p)?;
            let slope = rho_derivative(eps, &p)?;
            let back = best_k_error(rho, &p)?;
            println!("  eps {eps:<5} rho {rho:.6}  y {y:.6}  drho/deps {slope:>10.4}  error(rho) {back:.10}");
        }
    }

    // square case: the slope blows up like eps^(-1/3)
    let p = MPParams::new(1.0, 1.0)?;
    for eps in [1e-2, 1e-3, 1e-4] {
        let s = rho_derivative(eps, &p)?;
        println!("alpha = 1, eps = {eps:e}: |rho'| eps^(1/3) = {:.5}", s.abs() * eps.powf(1.0 / 3.0));
    }
    Ok(())
}
