//! Point-set diagnostics: how well selected centers cover the candidate
//! domain, how close they crowd each other, and how well conditioned the
//! kernel matrix on them is.
//!
//! All distance computations are brute-force over all pairs. At the point
//! counts this crate targets that is both fast enough and simple enough to
//! trust as reference output.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{kernel_matrix, Kernel};

/// Covering and conditioning summary of a selected point set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometryReport {
    /// Fill distance: largest distance from any candidate to the selected set.
    pub h: f64,
    /// Separation distance: smallest pairwise distance within the selected set.
    pub q: f64,
    /// Uniformity ratio `h / q`; small values mean evenly spread points.
    pub rho: f64,
    /// Smallest eigenvalue of the kernel matrix on the selected points.
    pub lambda_min: f64,
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Largest distance from any candidate point to its nearest selected point.
pub fn fill_distance(selected: &[Vec<f64>], candidates: &[Vec<f64>]) -> Result<f64> {
    if selected.is_empty() {
        return Err(Error::input(
            "fill distance needs at least one selected point",
        ));
    }
    if candidates.is_empty() {
        return Err(Error::input(
            "fill distance needs at least one candidate point",
        ));
    }
    Ok(candidates
        .iter()
        .map(|c| {
            selected
                .iter()
                .map(|s| distance(c, s))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max))
}

/// Smallest pairwise distance within the selected set.
pub fn separation_distance(selected: &[Vec<f64>]) -> Result<f64> {
    if selected.len() < 2 {
        return Err(Error::input(
            "separation distance needs at least two points",
        ));
    }
    let mut min = f64::INFINITY;
    for i in 0..selected.len() {
        for j in (i + 1)..selected.len() {
            min = min.min(distance(&selected[i], &selected[j]));
        }
    }
    Ok(min)
}

/// Smallest eigenvalue of the kernel matrix on the selected points.
pub fn smallest_eigenvalue(kernel: &Kernel, selected: &[Vec<f64>]) -> Result<f64> {
    let a = kernel_matrix(kernel, selected)?;
    Ok(a.symmetric_eigen().eigenvalues.min())
}

/// Least-squares slope of `log(value)` against `log(n)`.
///
/// Used to estimate empirical decay rates of power-function maxima and
/// kernel-matrix eigenvalues as the number of centers grows.
pub fn decay_slope(series: &[(usize, f64)]) -> Result<f64> {
    if series.len() < 3 {
        return Err(Error::input(format!(
            "decay slope needs at least 3 samples, got {}",
            series.len()
        )));
    }
    if let Some(&(n, v)) = series
        .iter()
        .find(|&&(n, v)| n == 0 || v <= 0.0 || v.is_nan())
    {
        return Err(Error::input(format!(
            "decay slope needs positive sizes and values, got ({n}, {v})"
        )));
    }
    let logs: Vec<(f64, f64)> = series
        .iter()
        .map(|&(n, v)| ((n as f64).ln(), v.ln()))
        .collect();
    let n = logs.len() as f64;
    let mean_x = logs.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_y = logs.iter().map(|(_, y)| y).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in &logs {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if sxx == 0.0 {
        return Err(Error::input(
            "decay slope needs at least two distinct sizes",
        ));
    }
    Ok(sxy / sxx)
}

/// Full geometry report for a selected set within its candidate domain.
pub fn report(
    kernel: &Kernel,
    selected: &[Vec<f64>],
    candidates: &[Vec<f64>],
) -> Result<GeometryReport> {
    let h = fill_distance(selected, candidates)?;
    let q = separation_distance(selected)?;
    let lambda_min = smallest_eigenvalue(kernel, selected)?;
    let rho = if q > 0.0 { h / q } else { f64::INFINITY };
    Ok(GeometryReport {
        h,
        q,
        rho,
        lambda_min,
    })
}
