//! Greedy center selection on synthetic vector-valued data.
//!
//! Runs residual-driven selection until the residual tolerance is met and
//! prints the per-iteration trace: which point was chosen, its power value
//! at selection time, and how the residual decays.
//!
//! Run with: cargo run --example greedy_selection

use vkoga::{synth, Generator, GreedyConfig, Kernel, KernelFamily, SelectionCriterion};

fn main() -> vkoga::Result<()> {
    let data = synth(Generator::FrankeVec, 300, 2, 2, 42)?;
    let kernel = Kernel::new(KernelFamily::Gaussian, 2.0)?;
    let config = GreedyConfig {
        criterion: SelectionCriterion::FGreedy,
        gamma: 0.0,
        tau_f: 1e-6,
        tau_p: 1e-10,
        max_points: Some(120),
    };

    let (state, stop) = vkoga::greedy::run(&kernel, &data, &config)?;

    println!(
        "{:>5} {:>7} {:>14} {:>14} {:>14}",
        "iter", "index", "power", "max_resid", "rmse"
    );
    for rec in &state.trace {
        if rec.iteration <= 10 || rec.iteration % 10 == 0 {
            println!(
                "{:>5} {:>7} {:>14.6e} {:>14.6e} {:>14.6e}",
                rec.iteration,
                rec.chosen_index,
                rec.power_at_chosen,
                rec.max_residual_norm,
                rec.rmse
            );
        }
    }
    println!();
    println!(
        "selected {} of {} points, stop reason: {}",
        state.selected.len(),
        data.len(),
        stop
    );
    println!("final max residual norm: {:.3e}", state.max_residual_norm());
    Ok(())
}
