//! File-based tasks behind the command-line interface.
//!
//! Each task reads datasets, runs the corresponding library operation, and
//! writes a fixed set of output files into an output directory. Output is
//! deterministic for fixed inputs and seed: numbers are printed in the
//! shortest form that parses back to the same value, and no unordered
//! collections are involved. If a task fails partway, the files it already
//! wrote are removed.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::data::{save_csv, synth, Dataset, Generator};
use crate::error::{Error, Result};
use crate::geometry;
use crate::greedy::{self, GreedyConfig, SelectionCriterion, StopReason};
use crate::kernels::{Kernel, KernelFamily};
use crate::model::{self, MetricsReport, Surrogate};
use crate::validation::{two_step_search, CvRecord, SearchConfig, SearchMode, SearchResult};

// ---------------------------------------------------------------------------
// output bookkeeping
// ---------------------------------------------------------------------------

/// Removes registered files on drop unless the task completed.
struct OutputGuard {
    written: Vec<PathBuf>,
    armed: bool,
}

impl OutputGuard {
    fn new() -> Self {
        OutputGuard {
            written: Vec::new(),
            armed: true,
        }
    }

    fn register(&mut self, path: &Path) {
        self.written.push(path.to_path_buf());
    }

    fn disarm(mut self) {
        self.armed = false;
    }
}

impl Drop for OutputGuard {
    fn drop(&mut self) {
        if self.armed {
            for path in &self.written {
                let _ = std::fs::remove_file(path);
            }
        }
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

/// Parameters shared by fitting and prediction runs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunParams {
    pub kernel_family: KernelFamily,
    pub eps: f64,
    pub criterion: SelectionCriterion,
    pub gamma: f64,
    pub lambda: f64,
    pub tau_f: f64,
    pub tau_p: f64,
    pub max_points: Option<usize>,
    pub seed: u64,
    /// Fraction of rows used for training; the rest become the test set.
    pub split: f64,
}

impl Default for RunParams {
    fn default() -> Self {
        RunParams {
            kernel_family: KernelFamily::Gaussian,
            eps: 1.0,
            criterion: SelectionCriterion::FGreedy,
            gamma: 0.0,
            lambda: 0.0,
            tau_f: 1e-7,
            tau_p: 1e-3,
            max_points: None,
            seed: 0,
            split: 1.0,
        }
    }
}

impl RunParams {
    pub fn kernel(&self) -> Result<Kernel> {
        Kernel::new(self.kernel_family, self.eps)
    }

    pub fn greedy_config(&self) -> GreedyConfig {
        GreedyConfig {
            criterion: self.criterion,
            gamma: self.gamma,
            tau_f: self.tau_f,
            tau_p: self.tau_p,
            max_points: self.max_points,
        }
    }
}

/// What a fit run produced, with the paths it wrote.
#[derive(Debug)]
pub struct FitOutcome {
    pub model: Surrogate,
    pub stop_reason: StopReason,
    pub n_selected: usize,
    pub train_metrics: MetricsReport,
    pub test_metrics: Option<MetricsReport>,
    pub model_path: PathBuf,
    pub trace_path: PathBuf,
    pub metrics_path: PathBuf,
}

#[derive(Serialize)]
struct MetricsDocument<'a> {
    train: &'a MetricsReport,
    test: Option<&'a MetricsReport>,
}

/// Selects centers greedily, fits the surrogate, and writes `model.json`,
/// `trace.csv` and `metrics.json` into `out_dir`.
pub fn run_fit(data: &Dataset, params: &RunParams, out_dir: &Path) -> Result<FitOutcome> {
    let kernel = params.kernel()?;
    let config = params.greedy_config();
    config.validate()?;
    let (train, test) = data.split(params.split, params.seed)?;

    let (state, stop_reason) = greedy::run(&kernel, &train, &config)?;
    let surrogate = model::fit(&kernel, &train, &state.selected, params.lambda)?;
    let train_metrics = surrogate.metrics(&train)?;
    let test_metrics = match &test {
        Some(t) => Some(surrogate.metrics(t)?),
        None => None,
    };

    ensure_dir(out_dir)?;
    let mut guard = OutputGuard::new();
    let model_path = out_dir.join("model.json");
    guard.register(&model_path);
    surrogate.save(&model_path)?;

    let trace_path = out_dir.join("trace.csv");
    guard.register(&trace_path);
    write_trace(&state.trace, &trace_path)?;

    let metrics_path = out_dir.join("metrics.json");
    guard.register(&metrics_path);
    let doc = MetricsDocument {
        train: &train_metrics,
        test: test_metrics.as_ref(),
    };
    write_json(&doc, &metrics_path)?;

    guard.disarm();
    Ok(FitOutcome {
        model: surrogate,
        stop_reason,
        n_selected: state.selected.len(),
        train_metrics,
        test_metrics,
        model_path,
        trace_path,
        metrics_path,
    })
}

fn write_trace(trace: &[crate::greedy::TraceRecord], path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(
        out,
        "iteration,chosen_index,power_at_chosen,max_residual_norm,rmse"
    )?;
    for r in trace {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.iteration, r.chosen_index, r.power_at_chosen, r.max_residual_norm, r.rmse
        )?;
    }
    out.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// predict
// ---------------------------------------------------------------------------

/// Evaluates a saved model on the inputs of `data` and writes
/// `predictions.csv` (same column layout as a dataset, outputs replaced by
/// predictions). Returns the predictions and the path written.
pub fn run_predict(
    model_path: &Path,
    data: &Dataset,
    out_dir: &Path,
) -> Result<(Vec<Vec<f64>>, PathBuf)> {
    let surrogate = Surrogate::load(model_path)?;
    let predictions = surrogate.predict(data.inputs())?;
    ensure_dir(out_dir)?;
    let mut guard = OutputGuard::new();
    let path = out_dir.join("predictions.csv");
    guard.register(&path);
    let predicted = Dataset::new(data.inputs().to_vec(), predictions.clone())?;
    save_csv(&predicted, &path)?;
    guard.disarm();
    Ok((predictions, path))
}

// ---------------------------------------------------------------------------
// cross-validation
// ---------------------------------------------------------------------------

/// Results of the paired base and stabilized searches.
#[derive(Debug)]
pub struct CvOutcome {
    pub base: SearchResult,
    pub stabilized: SearchResult,
    pub search_result_path: PathBuf,
    pub cv_table_path: PathBuf,
}

#[derive(Serialize)]
struct SearchSummary {
    best_eps: f64,
    best_gamma: f64,
    best_lambda: f64,
    n_selected_final: usize,
    model: serde_json::Value,
}

#[derive(Serialize)]
struct SearchDocument {
    base: SearchSummary,
    stabilized: SearchSummary,
}

fn summarize(result: &SearchResult) -> Result<SearchSummary> {
    Ok(SearchSummary {
        best_eps: result.best_eps,
        best_gamma: result.best_gamma,
        best_lambda: result.best_lambda,
        n_selected_final: result.n_selected_final,
        model: result.final_model.to_json()?,
    })
}

/// Runs the base search, then the stabilized search at the base's winning
/// `eps`, and writes `search_result.json` plus a combined `cv_table.csv`.
pub fn run_cv(data: &Dataset, config: &SearchConfig, out_dir: &Path) -> Result<CvOutcome> {
    let base = two_step_search(data, config, SearchMode::Base, None)?;
    let stabilized = two_step_search(data, config, SearchMode::Stabilized, Some(base.best_eps))?;

    ensure_dir(out_dir)?;
    let mut guard = OutputGuard::new();
    let search_result_path = out_dir.join("search_result.json");
    guard.register(&search_result_path);
    let doc = SearchDocument {
        base: summarize(&base)?,
        stabilized: summarize(&stabilized)?,
    };
    write_json(&doc, &search_result_path)?;

    let cv_table_path = out_dir.join("cv_table.csv");
    guard.register(&cv_table_path);
    write_cv_table(
        &[(&base, "base"), (&stabilized, "stabilized")],
        &cv_table_path,
    )?;

    guard.disarm();
    Ok(CvOutcome {
        base,
        stabilized,
        search_result_path,
        cv_table_path,
    })
}

fn write_cv_table(results: &[(&SearchResult, &str)], path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(
        out,
        "mode,step,param_name,param_value,fold,e_rmse,n_selected"
    )?;
    for (result, mode) in results {
        for r in &result.cv_table {
            write_cv_record(&mut out, mode, r)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn write_cv_record(out: &mut impl Write, mode: &str, r: &CvRecord) -> Result<()> {
    writeln!(
        out,
        "{},{},{},{},{},{},{}",
        mode, r.step, r.param_name, r.param_value, r.fold, r.e_rmse, r.n_selected
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------
// theory checks
// ---------------------------------------------------------------------------

/// Settings for the empirical decay-rate run.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryParams {
    pub kernel_family: KernelFamily,
    pub eps: f64,
    /// Candidate grid resolution per axis; the domain is a square grid on
    /// `[-1, 1]^2` with `grid_size^2` points.
    pub grid_size: usize,
    /// First center count included in the per-size records.
    pub n_min: usize,
    /// Last center count; the run selects exactly this many centers.
    pub n_max: usize,
}

impl Default for TheoryParams {
    fn default() -> Self {
        TheoryParams {
            kernel_family: KernelFamily::LinearMatern,
            eps: 1.0,
            grid_size: 40,
            n_min: 20,
            n_max: 200,
        }
    }
}

/// Diagnostics after `n` selected centers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryRecord {
    pub n: usize,
    /// Largest power function value over the candidate grid.
    pub max_power: f64,
    /// Smallest eigenvalue of the kernel matrix on the selected centers.
    pub lambda_min: f64,
    /// Fill distance of the selected centers in the candidate grid.
    pub h: f64,
    /// Separation distance of the selected centers.
    pub q: f64,
    /// Uniformity ratio `h / q`.
    pub rho: f64,
}

/// Full decay-rate report written as `theory_report.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryReport {
    pub kernel_family: KernelFamily,
    pub eps: f64,
    pub grid_size: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub records: Vec<TheoryRecord>,
    /// Log-log slope of `max_power` against `n`.
    pub power_slope: f64,
    /// Log-log slope of `lambda_min` against `n`.
    pub lambda_min_slope: f64,
    /// Largest uniformity ratio across the recorded sizes.
    pub max_rho: f64,
}

/// Uniform `grid_size x grid_size` grid on `[-1, 1]^2`.
pub fn square_grid(grid_size: usize) -> Result<Vec<Vec<f64>>> {
    if grid_size < 2 {
        return Err(Error::input("grid needs at least 2 points per axis"));
    }
    let step = 2.0 / (grid_size - 1) as f64;
    let coords: Vec<f64> = (0..grid_size).map(|i| -1.0 + step * i as f64).collect();
    let mut points = Vec::with_capacity(grid_size * grid_size);
    for &x in &coords {
        for &y in &coords {
            points.push(vec![x, y]);
        }
    }
    Ok(points)
}

/// Runs power-driven selection on a uniform grid and measures how the power
/// maximum, the smallest kernel eigenvalue, and the point geometry evolve with
/// the number of centers. Writes `theory_report.json`.
pub fn run_theory(params: &TheoryParams, out_dir: &Path) -> Result<TheoryReport> {
    if params.n_min < 3 {
        return Err(Error::input("n_min must be at least 3"));
    }
    if params.n_max <= params.n_min {
        return Err(Error::input("n_max must exceed n_min"));
    }
    let points = square_grid(params.grid_size)?;
    if params.n_max > points.len() {
        return Err(Error::input(format!(
            "n_max {} exceeds the {} grid points",
            params.n_max,
            points.len()
        )));
    }
    let targets = vec![vec![0.0]; points.len()];
    let data = Dataset::new(points, targets)?;
    let kernel = Kernel::new(params.kernel_family, params.eps)?;
    let config = GreedyConfig {
        criterion: SelectionCriterion::PGreedy,
        gamma: 0.0,
        tau_f: 0.0,
        tau_p: 0.0,
        max_points: Some(params.n_max),
    };
    let (state, _) = greedy::run(&kernel, &data, &config)?;
    if state.selected.len() < params.n_max {
        return Err(Error::stability(format!(
            "selection stopped at {} of {} requested centers",
            state.selected.len(),
            params.n_max
        )));
    }

    // Fill and separation distances are maintained incrementally while
    // walking the selection order; eigenvalues are recomputed per size.
    let m = data.len();
    let mut nearest = vec![f64::INFINITY; m];
    let mut separation = f64::INFINITY;
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(params.n_max);
    let mut records = Vec::new();
    for (step_idx, &chosen) in state.selected.iter().enumerate() {
        let new_point = data.input(chosen).to_vec();
        for (i, slot) in nearest.iter_mut().enumerate() {
            let d = dist(data.input(i), &new_point);
            if d < *slot {
                *slot = d;
            }
        }
        for c in &centers {
            let d = dist(c, &new_point);
            if d < separation {
                separation = d;
            }
        }
        centers.push(new_point);
        let n = step_idx + 1;
        if n >= params.n_min {
            let h = nearest.iter().cloned().fold(0.0, f64::max);
            let lambda_min = geometry::smallest_eigenvalue(&kernel, &centers)?;
            records.push(TheoryRecord {
                n,
                max_power: state.trace[step_idx].max_power,
                lambda_min,
                h,
                q: separation,
                rho: h / separation,
            });
        }
    }

    let power_series: Vec<(usize, f64)> = records.iter().map(|r| (r.n, r.max_power)).collect();
    let eigen_series: Vec<(usize, f64)> = records.iter().map(|r| (r.n, r.lambda_min)).collect();
    let report = TheoryReport {
        kernel_family: params.kernel_family,
        eps: params.eps,
        grid_size: params.grid_size,
        n_min: params.n_min,
        n_max: params.n_max,
        power_slope: geometry::decay_slope(&power_series)?,
        lambda_min_slope: geometry::decay_slope(&eigen_series)?,
        max_rho: records.iter().map(|r| r.rho).fold(0.0, f64::max),
        records,
    };

    ensure_dir(out_dir)?;
    let mut guard = OutputGuard::new();
    let path = out_dir.join("theory_report.json");
    guard.register(&path);
    write_json(&report, &path)?;
    guard.disarm();
    Ok(report)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

// ---------------------------------------------------------------------------
// synthetic data
// ---------------------------------------------------------------------------

/// Generates a synthetic dataset and writes it as `dataset.csv`.
pub fn run_synth(
    generator: Generator,
    n: usize,
    d: usize,
    q: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<(Dataset, PathBuf)> {
    let data = synth(generator, n, d, q, seed)?;
    ensure_dir(out_dir)?;
    let mut guard = OutputGuard::new();
    let path = out_dir.join("dataset.csv");
    guard.register(&path);
    save_csv(&data, &path)?;
    guard.disarm();
    Ok((data, path))
}
