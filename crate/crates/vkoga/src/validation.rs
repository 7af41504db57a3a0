//! Two-step cross-validated hyperparameter search.
//!
//! The protocol tunes one parameter at a time with shared folds:
//!
//! - Base mode: search the kernel shape `eps` with unrestricted selection,
//!   then search the regularization `lambda` at the winning `eps`.
//! - Stabilized mode: inherit `eps` from a base search, search the
//!   restriction strength `gamma`, then search `lambda` at the winning
//!   `gamma`.
//!
//! "Best" always means the smallest mean validation RMSE over folds; ties go
//! to the smaller parameter value. The fold partition is shuffled once per
//! search from the config seed and reused for every grid cell, so scores are
//! directly comparable across cells.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::data::{shuffle, Dataset};
use crate::error::{Error, Result};
use crate::greedy::{self, GreedyConfig, SelectionCriterion};
use crate::kernels::{Kernel, KernelFamily};
use crate::model::{self, Surrogate};

// ---------------------------------------------------------------------------
// grids and folds
// ---------------------------------------------------------------------------

/// `n` logarithmically spaced values from `lo` to `hi`, endpoints exact.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::input(format!(
            "log grid needs 0 < lo < hi, got lo={lo}, hi={hi}"
        )));
    }
    if n < 2 {
        return Err(Error::input("log grid needs at least 2 values"));
    }
    let ratio = (hi / lo).ln();
    let mut values: Vec<f64> = (0..n)
        .map(|i| lo * (ratio * i as f64 / (n - 1) as f64).exp())
        .collect();
    values[0] = lo;
    values[n - 1] = hi;
    Ok(values)
}

/// `n` equally spaced values from `lo` to `hi`, endpoints exact.
pub fn lin_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::input(format!(
            "linear grid needs lo < hi, got lo={lo}, hi={hi}"
        )));
    }
    if n < 2 {
        return Err(Error::input("linear grid needs at least 2 values"));
    }
    let step = (hi - lo) / (n - 1) as f64;
    let mut values: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
    values[0] = lo;
    values[n - 1] = hi;
    Ok(values)
}

/// Deterministic shuffled partition of `0..n` into `k` disjoint folds whose
/// sizes differ by at most one. Indices within each fold are sorted.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::input(format!(
            "cross-validation needs k >= 2, got {k}"
        )));
    }
    if n < k {
        return Err(Error::input(format!(
            "cannot split {n} rows into {k} folds"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shuffle(&mut order, &mut rng);
    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for j in 0..k {
        let size = base + usize::from(j < extra);
        let mut fold: Vec<usize> = order[start..start + size].to_vec();
        fold.sort_unstable();
        folds.push(fold);
        start += size;
    }
    Ok(folds)
}

// ---------------------------------------------------------------------------
// configuration and results
// ---------------------------------------------------------------------------

/// Hyperparameter search space and protocol settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub kernel_family: KernelFamily,
    pub criterion: SelectionCriterion,
    pub k_folds: usize,
    /// Kernel shape candidates, ascending.
    pub eps_grid: Vec<f64>,
    /// Restriction strength candidates, ascending (stabilized mode only).
    pub gamma_grid: Vec<f64>,
    /// Regularization candidates, ascending.
    pub lambda_grid: Vec<f64>,
    pub seed: u64,
    pub tau_f: f64,
    pub tau_p: f64,
    /// Optional cap on selected centers per greedy run.
    pub max_points: Option<usize>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            kernel_family: KernelFamily::Gaussian,
            criterion: SelectionCriterion::FGreedy,
            k_folds: 5,
            eps_grid: log_grid(1e-2, 1e1, 20).expect("static grid bounds"),
            gamma_grid: lin_grid(0.0, 1.0, 11).expect("static grid bounds"),
            lambda_grid: log_grid(1e-16, 1e3, 20).expect("static grid bounds"),
            seed: 0,
            tau_f: 1e-7,
            tau_p: 1e-3,
            max_points: None,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_folds < 2 {
            return Err(Error::input("k_folds must be at least 2"));
        }
        let sorted = |grid: &[f64]| grid.windows(2).all(|w| w[0] < w[1]);
        if self.eps_grid.is_empty() || !sorted(&self.eps_grid) {
            return Err(Error::input(
                "eps grid must be nonempty and strictly ascending",
            ));
        }
        if self.eps_grid.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            return Err(Error::input("eps grid values must be positive and finite"));
        }
        if self.gamma_grid.is_empty() || !sorted(&self.gamma_grid) {
            return Err(Error::input(
                "gamma grid must be nonempty and strictly ascending",
            ));
        }
        if self.gamma_grid.iter().any(|&g| !(0.0..=1.0).contains(&g)) {
            return Err(Error::input("gamma grid values must lie in [0, 1]"));
        }
        if self.lambda_grid.is_empty() || !sorted(&self.lambda_grid) {
            return Err(Error::input(
                "lambda grid must be nonempty and strictly ascending",
            ));
        }
        if self
            .lambda_grid
            .iter()
            .any(|&l| !(l >= 0.0 && l.is_finite()))
        {
            return Err(Error::input(
                "lambda grid values must be nonnegative and finite",
            ));
        }
        let probe = GreedyConfig {
            criterion: self.criterion,
            gamma: 0.0,
            tau_f: self.tau_f,
            tau_p: self.tau_p,
            max_points: self.max_points,
        };
        probe.validate()
    }

    fn greedy_config(&self, gamma: f64) -> GreedyConfig {
        GreedyConfig {
            criterion: self.criterion,
            gamma,
            tau_f: self.tau_f,
            tau_p: self.tau_p,
            max_points: self.max_points,
        }
    }
}

/// Which half of the two-step protocol to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    Base,
    Stabilized,
}

impl fmt::Display for SearchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SearchMode::Base => write!(f, "base"),
            SearchMode::Stabilized => write!(f, "stabilized"),
        }
    }
}

/// One cross-validation measurement: a (parameter value, fold) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvRecord {
    /// Search phase: 1 tunes the mode's primary parameter, 2 tunes lambda.
    pub step: usize,
    /// Which parameter the cell varies: "eps", "gamma" or "lambda".
    pub param_name: String,
    pub param_value: f64,
    /// Fold index in `0..k_folds` used as the validation split.
    pub fold: usize,
    /// Validation RMSE on the held-out fold.
    pub e_rmse: f64,
    /// Centers the greedy run selected on the training split. 0 means the
    /// fold was scored with the zero model.
    pub n_selected: usize,
}

/// Outcome of a full two-step search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub mode: SearchMode,
    pub best_eps: f64,
    pub best_gamma: f64,
    pub best_lambda: f64,
    /// Every (parameter value, fold) cell evaluated, in evaluation order.
    pub cv_table: Vec<CvRecord>,
    /// Centers selected by the final refit on the full training set.
    pub n_selected_final: usize,
    /// Surrogate refit on the full training set with the winning parameters.
    pub final_model: Surrogate,
}

// ---------------------------------------------------------------------------
// scoring
// ---------------------------------------------------------------------------

/// Per-fold outcome of one grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldScore {
    pub fold: usize,
    pub e_rmse: f64,
    pub n_selected: usize,
}

fn complement(n: usize, fold: &[usize]) -> Vec<usize> {
    let mut mask = vec![true; n];
    for &i in fold {
        mask[i] = false;
    }
    (0..n).filter(|&i| mask[i]).collect()
}

/// Scores one hyperparameter combination by k-fold cross-validation: greedy
/// selection and a ridge fit on each training split, RMSE on the held-out
/// fold. A fold whose greedy run selects no centers is scored with the zero
/// model (all predictions zero).
pub fn cv_score(
    kernel: &Kernel,
    config: &GreedyConfig,
    lambda: f64,
    data: &Dataset,
    folds: &[Vec<usize>],
) -> Result<(f64, Vec<FoldScore>)> {
    let mut scores = Vec::with_capacity(folds.len());
    let mut sum = 0.0;
    for (fold_idx, fold) in folds.iter().enumerate() {
        let train_idx = complement(data.len(), fold);
        let train = data.subset(&train_idx)?;
        let validation = data.subset(fold)?;
        let (state, _) = greedy::run(kernel, &train, config)?;
        let surrogate = model::fit(kernel, &train, &state.selected, lambda)?;
        let report = surrogate.metrics(&validation)?;
        sum += report.e_rmse;
        scores.push(FoldScore {
            fold: fold_idx,
            e_rmse: report.e_rmse,
            n_selected: state.selected.len(),
        });
    }
    Ok((sum / folds.len() as f64, scores))
}

/// Index of the smallest value; ties go to the earliest (smallest parameter).
fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    best
}

// ---------------------------------------------------------------------------
// the two-step protocol
// ---------------------------------------------------------------------------

/// Runs the two-step search on `data`.
///
/// Stabilized mode requires `eps_override`, the winning `eps` of a previous
/// base search; base mode ignores it and fixes `gamma = 0`.
pub fn two_step_search(
    data: &Dataset,
    config: &SearchConfig,
    mode: SearchMode,
    eps_override: Option<f64>,
) -> Result<SearchResult> {
    config.validate()?;
    let folds = kfold_split(data.len(), config.k_folds, config.seed)?;
    let mut cv_table: Vec<CvRecord> = Vec::new();

    // Step 1: tune the mode's primary parameter with lambda = 0.
    let (best_eps, best_gamma) = match mode {
        SearchMode::Base => {
            let mut means = Vec::with_capacity(config.eps_grid.len());
            for &eps in &config.eps_grid {
                let kernel = Kernel::new(config.kernel_family, eps)?;
                let (mean, scores) =
                    cv_score(&kernel, &config.greedy_config(0.0), 0.0, data, &folds)?;
                record_cells(&mut cv_table, 1, "eps", eps, &scores);
                means.push(mean);
            }
            (config.eps_grid[argmin(&means)], 0.0)
        }
        SearchMode::Stabilized => {
            let eps = eps_override
                .ok_or_else(|| Error::input("stabilized search requires the base model's eps"))?;
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::input(format!(
                    "eps override must be positive, got {eps}"
                )));
            }
            let kernel = Kernel::new(config.kernel_family, eps)?;
            let mut means = Vec::with_capacity(config.gamma_grid.len());
            for &gamma in &config.gamma_grid {
                let (mean, scores) =
                    cv_score(&kernel, &config.greedy_config(gamma), 0.0, data, &folds)?;
                record_cells(&mut cv_table, 1, "gamma", gamma, &scores);
                means.push(mean);
            }
            (eps, config.gamma_grid[argmin(&means)])
        }
    };

    // Step 2: tune lambda at the winning parameters. Selection does not
    // depend on lambda, so each fold's greedy run is done once and every
    // lambda reuses it.
    let kernel = Kernel::new(config.kernel_family, best_eps)?;
    let greedy_config = config.greedy_config(best_gamma);
    let mut fold_fits = Vec::with_capacity(folds.len());
    for fold in &folds {
        let train_idx = complement(data.len(), fold);
        let train = data.subset(&train_idx)?;
        let (state, _) = greedy::run(&kernel, &train, &greedy_config)?;
        let validation = data.subset(fold)?;
        fold_fits.push((train, validation, state.selected));
    }
    let mut lambda_means = Vec::with_capacity(config.lambda_grid.len());
    for &lambda in &config.lambda_grid {
        let mut sum = 0.0;
        let mut scores = Vec::with_capacity(folds.len());
        for (fold_idx, (train, validation, selected)) in fold_fits.iter().enumerate() {
            let surrogate = model::fit(&kernel, train, selected, lambda)?;
            let report = surrogate.metrics(validation)?;
            sum += report.e_rmse;
            scores.push(FoldScore {
                fold: fold_idx,
                e_rmse: report.e_rmse,
                n_selected: selected.len(),
            });
        }
        record_cells(&mut cv_table, 2, "lambda", lambda, &scores);
        lambda_means.push(sum / folds.len() as f64);
    }
    let best_lambda = config.lambda_grid[argmin(&lambda_means)];

    // Final refit on the full training set with the winning parameters.
    let (state, _) = greedy::run(&kernel, data, &greedy_config)?;
    let final_model = model::fit(&kernel, data, &state.selected, best_lambda)?;
    Ok(SearchResult {
        mode,
        best_eps,
        best_gamma,
        best_lambda,
        cv_table,
        n_selected_final: state.selected.len(),
        final_model,
    })
}

fn record_cells(
    table: &mut Vec<CvRecord>,
    step: usize,
    param_name: &str,
    param_value: f64,
    scores: &[FoldScore],
) {
    for s in scores {
        table.push(CvRecord {
            step,
            param_name: param_name.to_string(),
            param_value,
            fold: s.fold,
            e_rmse: s.e_rmse,
            n_selected: s.n_selected,
        });
    }
}
