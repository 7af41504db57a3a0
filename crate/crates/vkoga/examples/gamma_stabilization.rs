//! Effect of the power-level restriction on selection geometry.
//!
//! The `gamma` knob restricts each greedy step to candidates whose power
//! value is at least `gamma` times the current maximum. `gamma = 0` is the
//! unrestricted residual-driven rule; larger values force the chosen centers
//! to stay spread out. This example compares the geometry of the selected
//! sets: fill distance h, separation distance q, and their ratio rho = h / q
//! (lower rho means closer to uniform).
//!
//! Run with: cargo run --example gamma_stabilization

use vkoga::{geometry, synth, Generator, GreedyConfig, Kernel, KernelFamily, SelectionCriterion};

fn main() -> vkoga::Result<()> {
    let data = synth(Generator::FrankeVec, 400, 2, 2, 7)?;
    let kernel = Kernel::new(KernelFamily::Gaussian, 2.0)?;

    println!(
        "{:>6} {:>10} {:>12} {:>12} {:>10}",
        "gamma", "selected", "fill h", "sep q", "rho"
    );
    for &gamma in &[0.0, 0.25, 0.5, 0.75, 1.0] {
        let config = GreedyConfig {
            criterion: SelectionCriterion::FGreedy,
            gamma,
            tau_f: 0.0,
            tau_p: 1e-10,
            max_points: Some(80),
        };
        let (state, _) = vkoga::greedy::run(&kernel, &data, &config)?;
        let centers = state.selected_points();
        let report = geometry::report(&kernel, &centers, data.inputs())?;
        println!(
            "{:>6.2} {:>10} {:>12.5} {:>12.5} {:>10.3}",
            gamma,
            centers.len(),
            report.h,
            report.q,
            report.rho
        );
    }
    println!();
    println!("at gamma = 1 the residual no longer drives the choice; selection is power-only");
    Ok(())
}
