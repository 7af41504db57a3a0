//! Command-line front end: thin argument handling around the library's
//! pipeline tasks. Flag values override config-file values, which override
//! built-in defaults.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use vkoga::data::{load_csv, Dataset, Generator};
use vkoga::error::{Error, Result};
use vkoga::kernels::KernelFamily;
use vkoga::pipeline::{self, RunParams, TheoryParams};
use vkoga::validation::SearchConfig;

#[derive(Parser)]
#[command(
    name = "vkoga",
    version,
    about = "Greedy kernel surrogates for vector-valued data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Select centers greedily and fit a surrogate model
    Fit {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        data: DataArgs,
    },
    /// Evaluate a saved model on a dataset
    Predict {
        /// Model JSON written by `fit` or `cv`
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        data: DataArgs,
    },
    /// Two-step cross-validated search: base model, then stabilized model
    Cv {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        data: DataArgs,
        /// Number of cross-validation folds
        #[arg(long)]
        k_folds: Option<usize>,
    },
    /// Measure power-function and eigenvalue decay on a uniform grid
    Theory {
        #[command(flatten)]
        common: CommonArgs,
        /// Grid resolution per axis on [-1, 1]^2
        #[arg(long)]
        grid_size: Option<usize>,
        /// Smallest center count in the report
        #[arg(long)]
        n_min: Option<usize>,
        /// Largest center count in the report
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Generate a synthetic dataset and write it as CSV
    Synth {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        data: DataArgs,
    },
}

/// Flags every command accepts. Commands ignore the ones that do not apply
/// to them (e.g. `synth` uses only --seed and --out).
#[derive(Args)]
struct CommonArgs {
    /// Flat JSON config file; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for all randomized choices (splits, folds, generators)
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Kernel family: gaussian | linmatern
    #[arg(long)]
    kernel: Option<String>,
    /// Kernel shape parameter
    #[arg(long)]
    eps: Option<f64>,
    /// Selection criterion: f | p | fp
    #[arg(long)]
    criterion: Option<String>,
    /// Restriction strength in [0, 1]
    #[arg(long)]
    gamma: Option<f64>,
    /// Ridge regularization of the final fit
    #[arg(long)]
    lambda: Option<f64>,
    /// Residual stopping tolerance (0 disables)
    #[arg(long)]
    tau_f: Option<f64>,
    /// Power stopping tolerance (0 disables)
    #[arg(long)]
    tau_p: Option<f64>,
    /// Upper bound on selected centers
    #[arg(long)]
    max_points: Option<usize>,
    /// Fraction of rows used for training, the rest for test metrics
    #[arg(long)]
    split: Option<f64>,
}

/// Where the input dataset comes from: a CSV file or a generator.
#[derive(Args)]
struct DataArgs {
    /// Dataset CSV with columns x0..x{d-1}, y0..y{q-1}
    #[arg(long, conflicts_with = "generator")]
    data: Option<PathBuf>,
    /// Synthetic generator: franke-vec | stiffness-like | zero
    #[arg(long)]
    generator: Option<String>,
    /// Synthetic sample count
    #[arg(long, default_value_t = 200)]
    n: usize,
    /// Synthetic input dimension
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Synthetic output dimension
    #[arg(long, default_value_t = 2)]
    q: usize,
}

/// Config-file fields; all optional, same names as the flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    kernel: Option<String>,
    eps: Option<f64>,
    criterion: Option<String>,
    gamma: Option<f64>,
    lambda: Option<f64>,
    tau_f: Option<f64>,
    tau_p: Option<f64>,
    max_points: Option<usize>,
    seed: Option<u64>,
    split: Option<f64>,
    k_folds: Option<usize>,
    eps_grid: Option<Vec<f64>>,
    gamma_grid: Option<Vec<f64>>,
    lambda_grid: Option<Vec<f64>>,
}

fn load_file_config(path: Option<&PathBuf>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::input(format!("cannot read config {}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::input(format!("invalid config {}: {e}", p.display())))
        }
    }
}

/// Defaults, overridden by config-file fields, overridden by flags.
fn resolve_params(common: &CommonArgs, file: &FileConfig) -> Result<RunParams> {
    let mut params = RunParams::default();
    if let Some(kernel) = common.kernel.as_deref().or(file.kernel.as_deref()) {
        params.kernel_family = kernel.parse()?;
    }
    if let Some(criterion) = common.criterion.as_deref().or(file.criterion.as_deref()) {
        params.criterion = criterion.parse()?;
    }
    let pick = |flag: Option<f64>, file_value: Option<f64>, fallback: f64| {
        flag.or(file_value).unwrap_or(fallback)
    };
    params.eps = pick(common.eps, file.eps, params.eps);
    params.gamma = pick(common.gamma, file.gamma, params.gamma);
    params.lambda = pick(common.lambda, file.lambda, params.lambda);
    params.tau_f = pick(common.tau_f, file.tau_f, params.tau_f);
    params.tau_p = pick(common.tau_p, file.tau_p, params.tau_p);
    params.split = pick(common.split, file.split, params.split);
    params.max_points = common.max_points.or(file.max_points);
    params.seed = common.seed.or(file.seed).unwrap_or(0);
    Ok(params)
}

fn resolve_dataset(data: &DataArgs, seed: u64) -> Result<Dataset> {
    match (&data.data, &data.generator) {
        (Some(path), None) => load_csv(path),
        (None, Some(name)) => {
            let generator: Generator = name.parse()?;
            vkoga::data::synth(generator, data.n, data.d, data.q, seed)
        }
        (None, None) => Err(Error::input("provide a dataset with --data or --generator")),
        (Some(_), Some(_)) => unreachable!("clap rejects --data with --generator"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors; usage problems are
            // input errors.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit { common, data } => {
            let file = load_file_config(common.config.as_ref())?;
            let params = resolve_params(&common, &file)?;
            let dataset = resolve_dataset(&data, params.seed)?;
            let outcome = pipeline::run_fit(&dataset, &params, &common.out)?;
            println!(
                "selected {} centers ({})",
                outcome.n_selected, outcome.stop_reason
            );
            println!("train e_rmse = {}", outcome.train_metrics.e_rmse);
            if let Some(test) = &outcome.test_metrics {
                println!("test  e_rmse = {}", test.e_rmse);
            }
            println!(
                "wrote {}, {}, {}",
                outcome.model_path.display(),
                outcome.trace_path.display(),
                outcome.metrics_path.display()
            );
            Ok(())
        }
        Command::Predict {
            model,
            common,
            data,
        } => {
            let file = load_file_config(common.config.as_ref())?;
            let params = resolve_params(&common, &file)?;
            let dataset = resolve_dataset(&data, params.seed)?;
            let (predictions, path) = pipeline::run_predict(&model, &dataset, &common.out)?;
            println!(
                "wrote {} predictions to {}",
                predictions.len(),
                path.display()
            );
            Ok(())
        }
        Command::Cv {
            common,
            data,
            k_folds,
        } => {
            let file = load_file_config(common.config.as_ref())?;
            let params = resolve_params(&common, &file)?;
            let dataset = resolve_dataset(&data, params.seed)?;
            let mut search = SearchConfig {
                kernel_family: params.kernel_family,
                criterion: params.criterion,
                seed: params.seed,
                tau_f: params.tau_f,
                tau_p: params.tau_p,
                max_points: params.max_points,
                ..SearchConfig::default()
            };
            if let Some(k) = k_folds.or(file.k_folds) {
                search.k_folds = k;
            }
            if let Some(grid) = file.eps_grid.clone() {
                search.eps_grid = grid;
            }
            if let Some(grid) = file.gamma_grid.clone() {
                search.gamma_grid = grid;
            }
            if let Some(grid) = file.lambda_grid.clone() {
                search.lambda_grid = grid;
            }
            let outcome = pipeline::run_cv(&dataset, &search, &common.out)?;
            for (name, result) in [("base", &outcome.base), ("stabilized", &outcome.stabilized)] {
                println!(
                    "{name}: eps = {}, gamma = {}, lambda = {}, centers = {}",
                    result.best_eps, result.best_gamma, result.best_lambda, result.n_selected_final
                );
            }
            println!(
                "wrote {}, {}",
                outcome.search_result_path.display(),
                outcome.cv_table_path.display()
            );
            Ok(())
        }
        Command::Theory {
            common,
            grid_size,
            n_min,
            n_max,
        } => {
            let file = load_file_config(common.config.as_ref())?;
            let defaults = TheoryParams::default();
            let kernel_family = match common.kernel.as_deref().or(file.kernel.as_deref()) {
                Some(name) => name.parse::<KernelFamily>()?,
                None => defaults.kernel_family,
            };
            let params = TheoryParams {
                kernel_family,
                eps: common.eps.or(file.eps).unwrap_or(defaults.eps),
                grid_size: grid_size.unwrap_or(defaults.grid_size),
                n_min: n_min.unwrap_or(defaults.n_min),
                n_max: n_max.unwrap_or(defaults.n_max),
            };
            let report = pipeline::run_theory(&params, &common.out)?;
            println!(
                "power decay slope = {}, smallest-eigenvalue slope = {}, max rho = {}",
                report.power_slope, report.lambda_min_slope, report.max_rho
            );
            println!("wrote {}", common.out.join("theory_report.json").display());
            Ok(())
        }
        Command::Synth { common, data } => {
            let generator: Generator = data
                .generator
                .as_deref()
                .ok_or_else(|| Error::input("synth requires --generator"))?
                .parse()?;
            let file = load_file_config(common.config.as_ref())?;
            let seed = common.seed.or(file.seed).unwrap_or(0);
            let (dataset, path) =
                pipeline::run_synth(generator, data.n, data.d, data.q, seed, &common.out)?;
            println!(
                "wrote {} rows (d = {}, q = {}) to {}",
                dataset.len(),
                dataset.dim_in(),
                dataset.dim_out(),
                path.display()
            );
            Ok(())
        }
    }
}
