//! Sweeps over sigma, resolution and tolerance, written as CSV to stdout.
//! The sigma sweep carries a log-log fit whose slope should sit near the
//! domain dimension.
//!
//! cargo run --release --example scaling_sweeps > sweeps.csv

use std::io;

use kl_complexity::harness::{eps_sweep, resolution_sweep, sigma_sweep, FitResult, Grid, RunOptions, SweepRow, Tabulate};
use kl_complexity::table::{Format, Report};
use kl_complexity::{DomainTag, KernelFamily};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let opts = RunOptions::default();
    let sq = KernelFamily::SquaredExponential;

    let sigmas = [0.04, 0.028, 0.02, 0.014, 0.01];
    let (rows, fits) = sigma_sweep(sq, DomainTag::Interval, Grid::PointsPerSigma(4.0), &sigmas, &[0.05], &opts)?;
    for f in &fits {
        eprintln!("interval: slope {:.3} (r^2 = {:.4}) at eps = {:?}", f.slope, f.r_squared, f.eps);
    }
    Report::new(SweepRow::table(&rows))
        .with_config("sweep", "sigma")
        .with_fits(FitResult::table(&fits))
        .write(Format::Csv, io::stdout().lock())?;

    let res = resolution_sweep(KernelFamily::Exponential, DomainTag::Interval, 0.02, &[2.0, 4.0, 8.0], &[0.3], &opts)?;
    for r in &res {
        eprintln!("exp kernel, r = {:>2}: n = {:>4}, n_under = {}", r.r, r.n, r.n_under);
    }

    let (_, fits) = eps_sweep(sq, DomainTag::Interval, 0.05, Grid::PointsPerSigma(4.0), &[0.3, 0.1, 0.03, 0.01, 0.003], &opts)?;
    for f in &fits {
        eprintln!("eps sweep {}: slope {:.3}, r^2 = {:.4}", f.model, f.slope, f.r_squared);
    }
    Ok(())
}
