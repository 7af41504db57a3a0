//! Decay rates of power-driven selection on a uniform planar grid.
//!
//! Power-driven selection (the gamma = 1 limit) picks near-uniform centers.
//! This example measures, as the number of centers N grows, how fast the
//! power maximum and the smallest kernel-matrix eigenvalue decay, and checks
//! that the fill/separation ratio rho = h / q stays bounded. Log-log slopes
//! are reported; for the first-order Matern-type kernel in two dimensions
//! the power maximum decays roughly like N^(-3/4) and the smallest
//! eigenvalue like N^(-3/2).
//!
//! Run with: cargo run --release --example uniformity_rates

use vkoga::{TheoryParams, TheoryReport};

fn main() -> vkoga::Result<()> {
    let params = TheoryParams::default();
    let dir = std::env::temp_dir().join("vkoga_uniformity_rates");
    std::fs::create_dir_all(&dir)?;

    let report: TheoryReport = vkoga::pipeline::run_theory(&params, &dir)?;

    println!(
        "{:>6} {:>13} {:>13} {:>10} {:>10} {:>8}",
        "N", "max_power", "lambda_min", "h", "q", "rho"
    );
    for rec in report.records.iter().step_by(20) {
        println!(
            "{:>6} {:>13.5e} {:>13.5e} {:>10.5} {:>10.5} {:>8.3}",
            rec.n, rec.max_power, rec.lambda_min, rec.h, rec.q, rec.rho
        );
    }
    println!();
    println!("power maximum slope:       {:.4}", report.power_slope);
    println!("smallest eigenvalue slope: {:.4}", report.lambda_min_slope);
    println!("largest rho over all N:    {:.4}", report.max_rho);
    println!(
        "full record table written to {}",
        dir.join("theory_report.json").display()
    );
    Ok(())
}
