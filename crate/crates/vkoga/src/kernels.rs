//! Strictly positive definite radial kernels and kernel matrix assembly.
//!
//! Both shipped families are normalized radial kernels, `k(x, y) = Φ(ε·‖x−y‖₂)`
//! with `Φ(0) = 1`, so every kernel matrix has a unit diagonal and is positive
//! definite on pairwise-distinct points.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The radial profile `Φ` of a kernel.
///
/// `Gaussian` decays like `exp(−r²)`; `LinearMatern` is `(1+r)·exp(−r)`, whose
/// Fourier transform decays only algebraically. The two make a natural
/// smooth/rough contrast pair for surrogate experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    Gaussian,
    #[serde(rename = "linmatern")]
    LinearMatern,
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelFamily::Gaussian => write!(f, "gaussian"),
            KernelFamily::LinearMatern => write!(f, "linmatern"),
        }
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(KernelFamily::Gaussian),
            "linmatern" => Ok(KernelFamily::LinearMatern),
            other => Err(Error::input(format!(
                "unknown kernel family {other:?} (expected \"gaussian\" or \"linmatern\")"
            ))),
        }
    }
}

/// A radial kernel `k(x, y) = Φ(ε·‖x−y‖₂)` with shape parameter `ε > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    family: KernelFamily,
    epsilon: f64,
}

impl Kernel {
    pub fn new(family: KernelFamily, epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::input(format!(
                "kernel shape parameter must be positive and finite, got {epsilon}"
            )));
        }
        Ok(Kernel { family, epsilon })
    }

    pub fn gaussian(epsilon: f64) -> Result<Self> {
        Kernel::new(KernelFamily::Gaussian, epsilon)
    }

    pub fn linear_matern(epsilon: f64) -> Result<Self> {
        Kernel::new(KernelFamily::LinearMatern, epsilon)
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Radial profile at scaled distance `r = ε·‖x−y‖`.
    fn phi(&self, r: f64) -> f64 {
        match self.family {
            KernelFamily::Gaussian => (-r * r).exp(),
            KernelFamily::LinearMatern => (1.0 + r) * (-r).exp(),
        }
    }

    /// Evaluates `k(x, y)` for points of equal dimension.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != y.len() {
            return Err(Error::input(format!(
                "kernel arguments have mismatched dimensions {} and {}",
                x.len(),
                y.len()
            )));
        }
        Ok(self.eval_unchecked(x, y))
    }

    /// `eval` without the dimension check; callers validate shapes up front.
    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut sq = 0.0;
        for (a, b) in x.iter().zip(y.iter()) {
            let d = a - b;
            sq += d * d;
        }
        self.phi(self.epsilon * sq.sqrt())
    }
}

fn check_points(points: &[Vec<f64>], what: &str) -> Result<usize> {
    let first = points
        .first()
        .ok_or_else(|| Error::input(format!("{what} point list is empty")))?;
    let dim = first.len();
    if dim == 0 {
        return Err(Error::input(format!("{what} points have dimension 0")));
    }
    for (i, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(Error::input(format!(
                "{what} point {i} has dimension {} but point 0 has dimension {dim}",
                p.len()
            )));
        }
    }
    Ok(dim)
}

/// Symmetric kernel matrix `A` with `A[i, j] = k(x_i, x_j)`.
///
/// Symmetry is enforced structurally: only the upper triangle is evaluated and
/// mirrored, so `A[i][j] == A[j][i]` exactly.
pub fn kernel_matrix(kernel: &Kernel, points: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    check_points(points, "kernel matrix")?;
    let n = points.len();
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval_unchecked(&points[i], &points[j]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    Ok(a)
}

/// Rectangular evaluation matrix with entry `(i, j) = k(X[i], Z[j])`.
pub fn cross_matrix(kernel: &Kernel, x: &[Vec<f64>], z: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let dx = check_points(x, "cross matrix row")?;
    let dz = check_points(z, "cross matrix column")?;
    if dx != dz {
        return Err(Error::input(format!(
            "cross matrix point sets have mismatched dimensions {dx} and {dz}"
        )));
    }
    let mut a = DMatrix::zeros(x.len(), z.len());
    for i in 0..x.len() {
        for j in 0..z.len() {
            a[(i, j)] = kernel.eval_unchecked(&x[i], &z[j]);
        }
    }
    Ok(a)
}
