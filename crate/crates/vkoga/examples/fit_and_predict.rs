//! Full surrogate workflow: select centers, fit, save, reload, predict.
//!
//! Fits a regularized kernel surrogate on a train split, serializes it to
//! JSON, loads it back, and evaluates error metrics on held-out points.
//! The saved file round-trips bit-exactly.
//!
//! Run with: cargo run --example fit_and_predict

use vkoga::{synth, Generator, GreedyConfig, Kernel, KernelFamily, SelectionCriterion, Surrogate};

fn main() -> vkoga::Result<()> {
    let data = synth(Generator::FrankeVec, 500, 2, 3, 11)?;
    let (train, test) = data.split(0.8, 11)?;
    let test = test.expect("split below 1.0 yields a test set");

    let kernel = Kernel::new(KernelFamily::Gaussian, 2.0)?;
    let config = GreedyConfig {
        criterion: SelectionCriterion::FOverPGreedy,
        gamma: 0.2,
        tau_f: 1e-7,
        tau_p: 1e-8,
        max_points: Some(150),
    };
    let (state, stop) = vkoga::greedy::run(&kernel, &train, &config)?;
    println!("selected {} centers ({})", state.selected.len(), stop);

    let lambda = 1e-10;
    let model = vkoga::fit(&kernel, &train, &state.selected, lambda)?;

    let dir = std::env::temp_dir().join("vkoga_fit_and_predict");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("model.json");
    model.save(&path)?;
    let reloaded = Surrogate::load(&path)?;
    println!("saved and reloaded {}", path.display());

    let train_metrics = reloaded.metrics(&train)?;
    let test_metrics = reloaded.metrics(&test)?;
    println!(
        "train: e_rmse = {:.3e}, e_max = {:.3e}",
        train_metrics.e_rmse, train_metrics.e_max
    );
    println!(
        "test:  e_rmse = {:.3e}, e_max = {:.3e}",
        test_metrics.e_rmse, test_metrics.e_max
    );

    // Pointwise prediction works on raw coordinate rows too.
    let preds = reloaded.predict(&test.inputs()[..3])?;
    for (x, y) in test.inputs().iter().zip(&preds).take(3) {
        println!("s({:>18.6?}) = {:.6?}", x, y);
    }
    Ok(())
}
