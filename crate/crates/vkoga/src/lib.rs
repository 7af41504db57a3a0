//! Greedy kernel approximation for vector-valued data.
//!
//! This crate builds sparse kernel surrogates `s: ℝ^d → ℝ^q` from scattered
//! samples. Centers are chosen one at a time by a greedy rule (residual-driven,
//! stability-driven, or their quotient), optionally restricted to candidates
//! whose power-function value is within a factor `γ` of the current maximum.
//! The restriction trades a few extra centers for markedly better-conditioned
//! interpolation systems, which is what makes the surrogates usable at tight
//! tolerances.
//!
//! The main entry points are:
//! - [`greedy::run`] for center selection with full per-iteration traces,
//! - [`model::Surrogate::fit`] for the regularized fit on selected centers,
//! - [`validation::two_step_search`] for cross-validated hyperparameter search,
//! - [`geometry`] for fill/separation distances and spectral diagnostics,
//! - [`pipeline`] for the file-based tasks behind the command-line interface.
//!
//! See the `examples/` directory for runnable end-to-end walkthroughs.

pub mod data;
pub mod error;
pub mod geometry;
pub mod greedy;
pub mod kernels;
pub mod model;
pub mod pipeline;
pub mod validation;

pub use data::{load_csv, save_csv, synth, Dataset, Generator};
pub use error::{Error, Result};
pub use geometry::GeometryReport;
pub use greedy::{GreedyConfig, GreedyState, SelectionCriterion, StopReason, TraceRecord};
pub use kernels::{cross_matrix, kernel_matrix, Kernel, KernelFamily};
pub use model::{compute_metrics, fit, MetricsReport, Surrogate};
pub use pipeline::{RunParams, TheoryParams, TheoryReport};
pub use validation::{two_step_search, SearchConfig, SearchMode, SearchResult};
