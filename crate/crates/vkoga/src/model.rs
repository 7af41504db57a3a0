//! Regularized kernel surrogates on selected centers, plus error metrics.
//!
//! A fitted surrogate is a kernel expansion `s(x) = Σ_i α_i k(x, x_i)` over
//! the selected centers. Coefficients solve the ridge system
//! `(A + λI) α = Y` with one shared factorization across all output columns.
//! `λ = 0` gives plain interpolation at the centers.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::kernels::{cross_matrix, kernel_matrix, Kernel, KernelFamily};

/// Immutable fitted surrogate. Prediction and metric evaluation are pure.
#[derive(Debug, Clone, PartialEq)]
pub struct Surrogate {
    kernel: Kernel,
    centers: Vec<Vec<f64>>,
    /// One coefficient row per center, one column per output dimension.
    coefficients: DMatrix<f64>,
    lambda: f64,
    dim_in: usize,
    dim_out: usize,
}

/// Fits a surrogate on the rows of `data` named by `selected`.
///
/// The kernel matrix is built on the selected centers only and factorized
/// once; all `q` output columns reuse the factorization. An empty selection
/// yields the zero surrogate (no centers, all predictions zero).
pub fn fit(kernel: &Kernel, data: &Dataset, selected: &[usize], lambda: f64) -> Result<Surrogate> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::input(format!(
            "lambda must be a finite value >= 0, got {lambda}"
        )));
    }
    let mut seen = selected.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != selected.len() {
        return Err(Error::input("selected center indices contain duplicates"));
    }
    if let Some(&bad) = selected.iter().find(|&&i| i >= data.len()) {
        return Err(Error::input(format!(
            "center index {bad} out of range for {} rows",
            data.len()
        )));
    }
    let n = selected.len();
    let q = data.dim_out();
    if n == 0 {
        return Ok(Surrogate {
            kernel: *kernel,
            centers: Vec::new(),
            coefficients: DMatrix::zeros(0, q),
            lambda,
            dim_in: data.dim_in(),
            dim_out: q,
        });
    }
    let centers: Vec<Vec<f64>> = selected.iter().map(|&i| data.input(i).to_vec()).collect();
    let mut a = kernel_matrix(kernel, &centers)?;
    for i in 0..n {
        a[(i, i)] += lambda;
    }
    let y = DMatrix::from_fn(n, q, |i, j| data.output(selected[i])[j]);
    let chol = nalgebra::Cholesky::new(a.clone()).ok_or_else(|| {
        let lambda_min = a.symmetric_eigen().eigenvalues.min();
        Error::stability(format!(
            "regularized kernel matrix on {n} centers is not positive definite \
             (smallest eigenvalue {lambda_min:e}); increase lambda or loosen the \
             power tolerance"
        ))
    })?;
    let coefficients = chol.solve(&y);
    Ok(Surrogate {
        kernel: *kernel,
        centers,
        coefficients,
        lambda,
        dim_in: data.dim_in(),
        dim_out: q,
    })
}

impl Surrogate {
    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn n_centers(&self) -> usize {
        self.centers.len()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    /// Coefficient matrix, one row per center, one column per output.
    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.coefficients
    }

    /// Frobenius norm of the coefficient matrix.
    pub fn coefficient_norm(&self) -> f64 {
        self.coefficients.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Evaluates the surrogate at each query point.
    pub fn predict(&self, points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        if let Some(bad) = points.iter().find(|p| p.len() != self.dim_in) {
            return Err(Error::input(format!(
                "query point has dimension {}, model expects {}",
                bad.len(),
                self.dim_in
            )));
        }
        if self.centers.is_empty() {
            return Ok(points.iter().map(|_| vec![0.0; self.dim_out]).collect());
        }
        let g = cross_matrix(&self.kernel, points, &self.centers)?;
        let out = g * &self.coefficients;
        Ok((0..points.len())
            .map(|i| out.row(i).iter().cloned().collect())
            .collect())
    }

    /// Prediction errors of the surrogate over a labeled dataset.
    pub fn metrics(&self, data: &Dataset) -> Result<MetricsReport> {
        let predictions = self.predict(data.inputs())?;
        compute_metrics(&predictions, data.outputs())
    }

    /// The model as a JSON value in the same layout [`Surrogate::save`] writes.
    pub fn to_json(&self) -> Result<serde_json::Value> {
        Ok(serde_json::to_value(self.document())?)
    }

    fn document(&self) -> ModelDocument {
        ModelDocument {
            kernel_family: self.kernel.family(),
            epsilon: self.kernel.epsilon(),
            lambda: self.lambda,
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            centers: self.centers.clone(),
            coefficients: (0..self.coefficients.nrows())
                .map(|i| self.coefficients.row(i).iter().cloned().collect())
                .collect(),
        }
    }

    /// Writes the model as a self-contained JSON document.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = serde_json::to_string_pretty(&self.document())?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    /// Reads a model written by [`Surrogate::save`], revalidating all shapes.
    pub fn load(path: impl AsRef<Path>) -> Result<Surrogate> {
        let text = std::fs::read_to_string(path.as_ref())?;
        let doc: ModelDocument = serde_json::from_str(&text)?;
        doc.into_surrogate()
    }
}

/// On-disk model layout. Centers and coefficients are stored as one row per
/// center.
#[derive(Debug, Serialize, Deserialize)]
struct ModelDocument {
    kernel_family: KernelFamily,
    epsilon: f64,
    lambda: f64,
    dim_in: usize,
    dim_out: usize,
    centers: Vec<Vec<f64>>,
    coefficients: Vec<Vec<f64>>,
}

impl ModelDocument {
    fn into_surrogate(self) -> Result<Surrogate> {
        let kernel = Kernel::new(self.kernel_family, self.epsilon)?;
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::input(format!(
                "invalid lambda {} in model file",
                self.lambda
            )));
        }
        if self.dim_in == 0 || self.dim_out == 0 {
            return Err(Error::input("model dimensions must be at least 1"));
        }
        if self.centers.len() != self.coefficients.len() {
            return Err(Error::input(format!(
                "model has {} centers but {} coefficient rows",
                self.centers.len(),
                self.coefficients.len()
            )));
        }
        for c in &self.centers {
            if c.len() != self.dim_in || c.iter().any(|v| !v.is_finite()) {
                return Err(Error::input("malformed center row in model file"));
            }
        }
        for row in &self.coefficients {
            if row.len() != self.dim_out || row.iter().any(|v| !v.is_finite()) {
                return Err(Error::input("malformed coefficient row in model file"));
            }
        }
        let n = self.centers.len();
        let coefficients = DMatrix::from_fn(n, self.dim_out, |i, j| self.coefficients[i][j]);
        Ok(Surrogate {
            kernel,
            centers: self.centers,
            coefficients,
            lambda: self.lambda,
            dim_in: self.dim_in,
            dim_out: self.dim_out,
        })
    }
}

/// Aggregate prediction errors over an evaluation set.
///
/// The relative metrics divide each prediction error by the norm of the true
/// output. Points with zero-norm outputs are skipped there (and counted in
/// `n_zero_norm_skipped`); when every output has zero norm the relative
/// metrics are reported as null.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Largest prediction error norm.
    pub e_max: f64,
    /// Root mean square of prediction error norms.
    pub e_rmse: f64,
    /// Largest relative error, over points with nonzero output norm.
    pub e_max_rel: Option<f64>,
    /// Root mean square relative error, over points with nonzero output norm.
    pub e_rmse_rel: Option<f64>,
    /// Number of points the absolute metrics cover.
    pub n_points_evaluated: usize,
    /// Points excluded from the relative metrics because their output norm is 0.
    pub n_zero_norm_skipped: usize,
}

/// Computes [`MetricsReport`] from already-evaluated predictions.
pub fn compute_metrics(predictions: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<MetricsReport> {
    if predictions.len() != targets.len() {
        return Err(Error::input(format!(
            "{} predictions for {} targets",
            predictions.len(),
            targets.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::input("metrics need at least one evaluation point"));
    }
    let n = predictions.len();
    let mut e_max = 0.0f64;
    let mut sum_sq = 0.0f64;
    let mut rel_max = 0.0f64;
    let mut rel_sum_sq = 0.0f64;
    let mut n_rel = 0usize;
    for (s, y) in predictions.iter().zip(targets) {
        if s.len() != y.len() {
            return Err(Error::input(format!(
                "prediction has dimension {}, target has {}",
                s.len(),
                y.len()
            )));
        }
        let err_sq: f64 = s.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        let err = err_sq.sqrt();
        e_max = e_max.max(err);
        sum_sq += err_sq;
        let y_norm_sq: f64 = y.iter().map(|v| v * v).sum();
        if y_norm_sq > 0.0 {
            n_rel += 1;
            rel_max = rel_max.max(err / y_norm_sq.sqrt());
            rel_sum_sq += err_sq / y_norm_sq;
        }
    }
    let (e_max_rel, e_rmse_rel) = if n_rel > 0 {
        (Some(rel_max), Some((rel_sum_sq / n_rel as f64).sqrt()))
    } else {
        (None, None)
    };
    Ok(MetricsReport {
        e_max,
        e_rmse: (sum_sq / n as f64).sqrt(),
        e_max_rel,
        e_rmse_rel,
        n_points_evaluated: n,
        n_zero_norm_skipped: n - n_rel,
    })
}
