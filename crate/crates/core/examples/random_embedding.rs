//! One realization of Gaussian and Rademacher vector sets against the
//! Marchenko–Pastur prediction for the least embedding dimension.
//!
//! cargo run --release --example random_embedding

use kl_complexity::ensembles::EntryDist;
use kl_complexity::harness::{mp_comparison, MpComparison, MpMeasure, RunOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let opts = RunOptions::default();
    for dist in [EntryDist::Gaussian, EntryDist::Rademacher] {
        let cfg = MpComparison::new(dist, vec![100, 200, 400], 0.25, vec![0.05, 0.1, 0.2], 2024);
        println!("{dist}:");
        for row in mp_comparison(&cfg, &opts)? {
            if row.measure != MpMeasure::Embedding {
                continue;
            }
            println!(
                "  n = {:>3}, d = {:>4}, eps = {:<4}: empirical {:>3}, predicted {:>8.2}, gap {:.2} (margin {})",
                row.n, row.d, row.eps, row.empirical, row.predicted, row.abs_gap, row.margin
            );
        }
    }
    Ok(())
}
