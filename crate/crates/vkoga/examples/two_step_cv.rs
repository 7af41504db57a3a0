//! Two-step cross-validated hyperparameter search, base vs stabilized.
//!
//! The base search tunes the kernel shape eps (step 1) and then the ridge
//! weight lambda (step 2), always with gamma = 0. The stabilized search
//! inherits the base eps, tunes gamma in step 1, and lambda in step 2.
//! All folds share one seeded shuffle, so the comparison is apples to
//! apples and every rerun is byte-identical.
//!
//! Grids here are cut down so the example finishes in seconds; defaults are
//! wider (20-point log grids for eps and lambda, 11-point linear for gamma).
//!
//! Run with: cargo run --release --example two_step_cv

use vkoga::{synth, Generator, SearchConfig, SearchMode};

fn main() -> vkoga::Result<()> {
    let data = synth(Generator::FrankeVec, 250, 2, 2, 3)?;

    let config = SearchConfig {
        eps_grid: vec![0.5, 1.0, 2.0, 4.0],
        gamma_grid: vec![0.0, 0.3, 0.6, 1.0],
        lambda_grid: vec![1e-14, 1e-10, 1e-6, 1e-2],
        max_points: Some(60),
        ..SearchConfig::default()
    };

    let base = vkoga::two_step_search(&data, &config, SearchMode::Base, None)?;
    let stab = vkoga::two_step_search(&data, &config, SearchMode::Stabilized, Some(base.best_eps))?;

    for result in [&base, &stab] {
        println!(
            "{:<10} eps = {:<8} gamma = {:<5} lambda = {:<8.1e} centers = {}",
            result.mode.to_string(),
            result.best_eps,
            result.best_gamma,
            result.best_lambda,
            result.n_selected_final
        );
    }

    println!();
    println!("fold scores from the base eps sweep (step 1):");
    println!(
        "{:>6} {:>10} {:>6} {:>12} {:>10}",
        "step", "eps", "fold", "e_rmse", "selected"
    );
    for rec in base.cv_table.iter().filter(|r| r.step == 1).take(8) {
        println!(
            "{:>6} {:>10.4} {:>6} {:>12.5e} {:>10}",
            rec.step, rec.param_value, rec.fold, rec.e_rmse, rec.n_selected
        );
    }
    Ok(())
}
