//! Incremental greedy selection of kernel interpolation centers.
//!
//! The selection loop maintains, for every candidate point, the squared power
//! function value and the vectorial interpolation residual, both updated in
//! O(N·M) per iteration through an orthonormal (Newton) basis. Three
//! selection indicators are supported: residual norm, power value, and their
//! quotient. A restriction parameter `gamma` confines each choice to
//! candidates whose power value is within a factor `gamma` of the current
//! maximum, which keeps the selected set well separated and the interpolation
//! matrix well conditioned.
//!
//! [`oracle_power`] recomputes the power function from scratch with a dense
//! factorization. It is deliberately independent of the incremental update so
//! the two routes can be checked against each other.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::kernels::{kernel_matrix, Kernel};

// ---------------------------------------------------------------------------
// configuration
// ---------------------------------------------------------------------------

/// Which quantity the greedy loop maximizes when picking the next center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SelectionCriterion {
    /// Norm of the vectorial residual at the candidate.
    #[serde(rename = "f")]
    FGreedy,
    /// Power function value at the candidate; ignores the outputs entirely.
    #[serde(rename = "p")]
    PGreedy,
    /// Residual norm divided by power value; 0 at already-interpolated points.
    #[serde(rename = "fp")]
    FOverPGreedy,
}

impl FromStr for SelectionCriterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f" => Ok(SelectionCriterion::FGreedy),
            "p" => Ok(SelectionCriterion::PGreedy),
            "fp" => Ok(SelectionCriterion::FOverPGreedy),
            other => Err(Error::input(format!(
                "unknown selection criterion {other:?} (expected \"f\", \"p\" or \"fp\")"
            ))),
        }
    }
}

impl fmt::Display for SelectionCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionCriterion::FGreedy => write!(f, "f"),
            SelectionCriterion::PGreedy => write!(f, "p"),
            SelectionCriterion::FOverPGreedy => write!(f, "fp"),
        }
    }
}

/// Parameters of one greedy selection run.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyConfig {
    pub criterion: SelectionCriterion,
    /// Restriction strength in `[0, 1]`: 0 leaves the choice unrestricted,
    /// 1 forces the power-maximizing choice regardless of criterion.
    pub gamma: f64,
    /// Stop once the largest residual norm over candidates drops below this.
    /// 0 disables the residual stop.
    pub tau_f: f64,
    /// Reject a chosen point (and stop) if its power value is below this.
    /// 0 disables the power stop.
    pub tau_p: f64,
    /// Upper bound on the number of selected centers; `None` means all
    /// candidates may be selected.
    pub max_points: Option<usize>,
}

impl Default for GreedyConfig {
    fn default() -> Self {
        GreedyConfig {
            criterion: SelectionCriterion::FGreedy,
            gamma: 0.0,
            tau_f: 1e-7,
            tau_p: 1e-3,
            max_points: None,
        }
    }
}

impl GreedyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma <= 1.0) {
            return Err(Error::input(format!(
                "gamma must be in [0, 1], got {}",
                self.gamma
            )));
        }
        if !(self.tau_f >= 0.0 && self.tau_f.is_finite()) {
            return Err(Error::input(format!(
                "tau_f must be a finite value >= 0, got {}",
                self.tau_f
            )));
        }
        if !(self.tau_p >= 0.0 && self.tau_p.is_finite()) {
            return Err(Error::input(format!(
                "tau_p must be a finite value >= 0, got {}",
                self.tau_p
            )));
        }
        if self.max_points == Some(0) {
            return Err(Error::input("max_points must be at least 1"));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// state
// ---------------------------------------------------------------------------

/// One row of the per-iteration trace, recorded after each accepted center.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    /// Number of selected centers after this step (1-based).
    pub iteration: usize,
    /// Candidate index of the accepted center.
    pub chosen_index: usize,
    /// Power value the center had at selection time, before the update.
    pub power_at_chosen: f64,
    /// Largest residual norm over all candidates after the update.
    pub max_residual_norm: f64,
    /// Root mean square of residual norms over all candidates after the update.
    pub rmse: f64,
    /// Largest power value over all candidates after the update. Kept in
    /// memory for diagnostics; not part of the exported trace columns.
    pub max_power: f64,
}

/// Why a greedy run terminated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Every candidate has been selected.
    AllSelected,
    /// The largest residual norm fell below `tau_f`.
    ResidualTolerance,
    /// The chosen point's power value fell below `tau_p`; the point was
    /// rejected rather than added.
    PowerTolerance,
    /// The configured center budget was reached.
    MaxPoints,
    /// The chosen point was numerically dependent on the selected set.
    Stability,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StopReason::AllSelected => "all candidates selected",
            StopReason::ResidualTolerance => "residual tolerance reached",
            StopReason::PowerTolerance => "power tolerance reached",
            StopReason::MaxPoints => "maximum number of points reached",
            StopReason::Stability => "numerically dependent point rejected",
        };
        write!(f, "{s}")
    }
}

/// Mutable state of a greedy run over a fixed candidate set.
///
/// Invariants maintained by [`extend`]:
/// - `power_sq[i] >= 0` for all candidates (clamped),
/// - `power_sq[i] == 0` and `residual[i]` is the zero vector at every selected
///   index,
/// - the maximum of `power_sq` never increases from one iteration to the next.
#[derive(Debug, Clone)]
pub struct GreedyState {
    /// The discrete candidate domain; selection indices refer to its rows.
    pub candidates: Dataset,
    /// Selected candidate indices in selection order.
    pub selected: Vec<usize>,
    /// `selected_mask[i]` is true iff candidate `i` has been selected.
    pub selected_mask: Vec<bool>,
    /// Orthonormal basis values: `newton_values[j][i]` is basis function `j`
    /// evaluated at candidate `i`.
    pub newton_values: Vec<Vec<f64>>,
    /// Squared power function value per candidate.
    pub power_sq: Vec<f64>,
    /// Vectorial residual (target minus current interpolant) per candidate.
    pub residual: Vec<Vec<f64>>,
    /// One record per accepted center.
    pub trace: Vec<TraceRecord>,
}

impl GreedyState {
    /// Largest residual norm over all candidates.
    pub fn max_residual_norm(&self) -> f64 {
        self.residual.iter().map(|r| norm(r)).fold(0.0, f64::max)
    }

    /// Root mean square of residual norms over all candidates.
    pub fn residual_rmse(&self) -> f64 {
        let sum: f64 = self
            .residual
            .iter()
            .map(|r| r.iter().map(|v| v * v).sum::<f64>())
            .sum();
        (sum / self.residual.len() as f64).sqrt()
    }

    /// Largest power function value (not squared) over all candidates.
    pub fn max_power(&self) -> f64 {
        self.power_sq.iter().cloned().fold(0.0, f64::max).sqrt()
    }

    /// Inputs of the selected centers, in selection order.
    pub fn selected_points(&self) -> Vec<Vec<f64>> {
        self.selected
            .iter()
            .map(|&i| self.candidates.input(i).to_vec())
            .collect()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

// ---------------------------------------------------------------------------
// operations
// ---------------------------------------------------------------------------

/// Fresh state with no selected centers: power values equal `k(x, x)` and the
/// residual equals the raw outputs.
pub fn init_state(kernel: &Kernel, data: &Dataset) -> Result<GreedyState> {
    let m = data.len();
    let power_sq: Vec<f64> = data
        .inputs()
        .iter()
        .map(|x| kernel.eval_unchecked(x, x))
        .collect();
    Ok(GreedyState {
        candidates: data.clone(),
        selected: Vec::new(),
        selected_mask: vec![false; m],
        newton_values: Vec::new(),
        power_sq,
        residual: data.outputs().to_vec(),
        trace: Vec::new(),
    })
}

/// Per-candidate selection indicator values for the given criterion.
///
/// At points with (clamped) zero power the quotient indicator is defined as 0,
/// so already-interpolated points never look attractive.
pub fn indicator(state: &GreedyState, criterion: SelectionCriterion) -> Vec<f64> {
    match criterion {
        SelectionCriterion::FGreedy => state.residual.iter().map(|r| norm(r)).collect(),
        SelectionCriterion::PGreedy => state.power_sq.iter().map(|p| p.sqrt()).collect(),
        SelectionCriterion::FOverPGreedy => state
            .residual
            .iter()
            .zip(&state.power_sq)
            .map(|(r, &p)| if p == 0.0 { 0.0 } else { norm(r) / p.sqrt() })
            .collect(),
    }
}

/// Unselected candidate indices whose power value is at least `gamma` times
/// the current maximum power value.
pub fn restricted_candidates(state: &GreedyState, gamma: f64) -> Vec<usize> {
    let max_power_sq = state.power_sq.iter().cloned().fold(0.0, f64::max);
    let threshold = gamma * max_power_sq.sqrt();
    (0..state.power_sq.len())
        .filter(|&i| !state.selected_mask[i] && state.power_sq[i].sqrt() >= threshold)
        .collect()
}

/// Index of the next center: the smallest unselected index maximizing the
/// indicator over the restricted candidate set.
///
/// `gamma == 1` short-circuits to the power-maximizing choice for every
/// criterion, so a fully restricted run reproduces pure power-driven
/// selection exactly, including its tie-breaks.
pub fn restricted_argmax(state: &GreedyState, config: &GreedyConfig) -> Result<usize> {
    let m = state.power_sq.len();
    if state.selected.len() >= m {
        return Err(Error::input("no unselected candidates remain"));
    }
    if config.gamma == 1.0 {
        return argmax_power(state);
    }
    let values = indicator(state, config.criterion);
    let max_power_sq = state.power_sq.iter().cloned().fold(0.0, f64::max);
    let threshold = config.gamma * max_power_sq.sqrt();
    let mut best: Option<(usize, f64)> = None;
    for (i, &value) in values.iter().enumerate() {
        if state.selected_mask[i] || state.power_sq[i].sqrt() < threshold {
            continue;
        }
        match best {
            Some((_, best_v)) if value <= best_v => {}
            _ => best = Some((i, value)),
        }
    }
    // The power-maximizing index always passes the threshold, so the
    // restricted set cannot be empty while unselected candidates remain.
    best.map(|(i, _)| i)
        .ok_or_else(|| Error::input("restricted candidate set is empty"))
}

/// Smallest unselected index with maximal power value.
fn argmax_power(state: &GreedyState) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for i in 0..state.power_sq.len() {
        if state.selected_mask[i] {
            continue;
        }
        match best {
            Some((_, best_p)) if state.power_sq[i] <= best_p => {}
            _ => best = Some((i, state.power_sq[i])),
        }
    }
    best.map(|(i, _)| i)
        .ok_or_else(|| Error::input("no unselected candidates remain"))
}

/// Adds `new_index` to the selected set, updating basis values, power values,
/// and residuals at every candidate, and appends a trace record.
///
/// Fails with a stability error when the point's power value is not strictly
/// positive, which signals numerical dependence on the selected set.
pub fn extend(state: &mut GreedyState, kernel: &Kernel, new_index: usize) -> Result<()> {
    let m = state.candidates.len();
    if new_index >= m {
        return Err(Error::input(format!(
            "candidate index {new_index} out of range for {m} candidates"
        )));
    }
    if state.selected_mask[new_index] {
        return Err(Error::input(format!(
            "candidate {new_index} already selected"
        )));
    }
    let power_sq_new = state.power_sq[new_index];
    if power_sq_new <= 0.0 {
        return Err(Error::stability(format!(
            "candidate {new_index} has vanishing power value {power_sq_new}; \
             it is numerically dependent on the selected set"
        )));
    }
    let p_new = power_sq_new.sqrt();
    let x_new = state.candidates.input(new_index).to_vec();

    // New basis row: kernel column of the chosen point, orthogonalized
    // against the existing basis and scaled to unit norm at the new point.
    let mut row: Vec<f64> = state
        .candidates
        .inputs()
        .iter()
        .map(|x| kernel.eval_unchecked(x, &x_new))
        .collect();
    for basis in &state.newton_values {
        let at_new = basis[new_index];
        if at_new != 0.0 {
            for i in 0..m {
                row[i] -= at_new * basis[i];
            }
        }
    }
    for value in row.iter_mut() {
        *value /= p_new;
    }
    // The new point's own basis value equals its power value by construction;
    // writing it directly removes the residual round-off of the loop above.
    row[new_index] = p_new;

    for (p, &w) in state.power_sq.iter_mut().zip(&row) {
        *p = (*p - w * w).max(0.0);
    }
    let coeff: Vec<f64> = state.residual[new_index]
        .iter()
        .map(|r| r / p_new)
        .collect();
    for (i, &w) in row.iter().enumerate() {
        if w != 0.0 {
            for (res, c) in state.residual[i].iter_mut().zip(&coeff) {
                *res -= w * c;
            }
        }
    }
    // Interpolation is exact at the new center; pin both quantities to zero
    // so downstream indicator and stopping logic sees clean values.
    state.power_sq[new_index] = 0.0;
    for res in state.residual[new_index].iter_mut() {
        *res = 0.0;
    }

    state.newton_values.push(row);
    state.selected.push(new_index);
    state.selected_mask[new_index] = true;
    state.trace.push(TraceRecord {
        iteration: state.selected.len(),
        chosen_index: new_index,
        power_at_chosen: p_new,
        max_residual_norm: state.max_residual_norm(),
        rmse: state.residual_rmse(),
        max_power: state.max_power(),
    });
    Ok(())
}

/// Runs the full greedy loop and returns the final state with the reason it
/// stopped.
///
/// Stopping is checked at the top of each iteration, in this order: all
/// candidates selected, residual below `tau_f`, center budget exhausted. The
/// power tolerance is checked against the chosen point after the argmax; a
/// sub-tolerance point is rejected, not added. A numerically dependent chosen
/// point likewise ends the run rather than failing it.
pub fn run(
    kernel: &Kernel,
    data: &Dataset,
    config: &GreedyConfig,
) -> Result<(GreedyState, StopReason)> {
    config.validate()?;
    let mut state = init_state(kernel, data)?;
    let m = data.len();
    let cap = config.max_points.unwrap_or(m).min(m);
    loop {
        if state.selected.len() == m {
            return Ok((state, StopReason::AllSelected));
        }
        if state.max_residual_norm() < config.tau_f {
            return Ok((state, StopReason::ResidualTolerance));
        }
        if state.selected.len() >= cap {
            return Ok((state, StopReason::MaxPoints));
        }
        let next = restricted_argmax(&state, config)?;
        if state.power_sq[next].sqrt() < config.tau_p {
            return Ok((state, StopReason::PowerTolerance));
        }
        match extend(&mut state, kernel, next) {
            Ok(()) => {}
            Err(Error::Stability(_)) => return Ok((state, StopReason::Stability)),
            Err(e) => return Err(e),
        }
    }
}

/// Power function value at `x` for the given center set, recomputed from
/// scratch: the kernel matrix on the centers is factorized densely and the
/// quadratic form is subtracted from `k(x, x)`.
///
/// This is the verification oracle for the incremental update; it shares no
/// code path with [`extend`] beyond kernel evaluation.
pub fn oracle_power(kernel: &Kernel, selected_points: &[Vec<f64>], x: &[f64]) -> Result<f64> {
    let diag = kernel.eval(x, x)?;
    if selected_points.is_empty() {
        return Ok(diag.sqrt());
    }
    // At a center the power function is identically zero; returning the exact
    // value sidesteps the sqrt-amplified round-off of the solve below.
    if selected_points.iter().any(|p| p.as_slice() == x) {
        return Ok(0.0);
    }
    let a = kernel_matrix(kernel, selected_points)?;
    let chol = nalgebra::Cholesky::new(a).ok_or_else(|| {
        Error::input("center set is numerically dependent (duplicate or near-duplicate points)")
    })?;
    let v = DVector::from_iterator(
        selected_points.len(),
        selected_points.iter().map(|p| kernel.eval_unchecked(x, p)),
    );
    let w = chol.solve(&v);
    Ok((diag - v.dot(&w)).max(0.0).sqrt())
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synth, Generator};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid_1d(points: &[f64]) -> Dataset {
        let inputs: Vec<Vec<f64>> = points.iter().map(|&x| vec![x]).collect();
        let outputs: Vec<Vec<f64>> = points.iter().map(|&x| vec![x.sin(), x.cos()]).collect();
        Dataset::new(inputs, outputs).unwrap()
    }

    /// State with prescribed power and residual values, for argmax tests.
    fn synthetic_state(power: &[f64], residual_norms: &[f64]) -> GreedyState {
        let m = power.len();
        let data = Dataset::new(
            (0..m).map(|i| vec![i as f64]).collect(),
            residual_norms.iter().map(|&r| vec![r]).collect(),
        )
        .unwrap();
        GreedyState {
            candidates: data.clone(),
            selected: Vec::new(),
            selected_mask: vec![false; m],
            newton_values: Vec::new(),
            power_sq: power.iter().map(|p| p * p).collect(),
            residual: residual_norms.iter().map(|&r| vec![r]).collect(),
            trace: Vec::new(),
        }
    }

    #[test]
    fn init_state_has_unit_power_and_raw_residual() {
        let kernel = Kernel::gaussian(1.5).unwrap();
        let data = grid_1d(&[0.0, 0.25, 0.5, 0.75, 1.0]);
        let state = init_state(&kernel, &data).unwrap();
        assert!(state.power_sq.iter().all(|&p| p == 1.0));
        assert_eq!(state.residual, data.outputs().to_vec());
        assert!(state.selected.is_empty());
        assert!(state.trace.is_empty());
    }

    #[test]
    fn indicators_at_empty_selection() {
        let kernel = Kernel::gaussian(1.0).unwrap();
        let data = grid_1d(&[0.0, 0.3, 0.9]);
        let state = init_state(&kernel, &data).unwrap();
        let f = indicator(&state, SelectionCriterion::FGreedy);
        let p = indicator(&state, SelectionCriterion::PGreedy);
        let fp = indicator(&state, SelectionCriterion::FOverPGreedy);
        for i in 0..data.len() {
            let y_norm = norm(data.output(i));
            assert!((f[i] - y_norm).abs() < 1e-15);
            assert_eq!(p[i], 1.0);
            assert!((fp[i] - y_norm).abs() < 1e-15);
        }
    }

    #[test]
    fn indicators_vanish_at_selected_points() {
        let kernel = Kernel::gaussian(1.0).unwrap();
        let data = grid_1d(&[0.0, 0.3, 0.9]);
        let mut state = init_state(&kernel, &data).unwrap();
        extend(&mut state, &kernel, 1).unwrap();
        for criterion in [
            SelectionCriterion::FGreedy,
            SelectionCriterion::PGreedy,
            SelectionCriterion::FOverPGreedy,
        ] {
            assert_eq!(indicator(&state, criterion)[1], 0.0);
        }
    }

    #[test]
    fn restricted_argmax_respects_gamma() {
        let state = synthetic_state(&[0.9, 0.5, 0.3], &[0.1, 0.7, 2.0]);
        let config = |gamma| GreedyConfig {
            criterion: SelectionCriterion::FGreedy,
            gamma,
            ..GreedyConfig::default()
        };
        // Threshold 0.45 admits powers {0.9, 0.5}; the best residual there is index 1.
        assert_eq!(restricted_argmax(&state, &config(0.5)).unwrap(), 1);
        assert_eq!(restricted_argmax(&state, &config(0.0)).unwrap(), 2);
        assert_eq!(restricted_argmax(&state, &config(1.0)).unwrap(), 0);
    }

    #[test]
    fn restricted_set_shrinks_with_gamma() {
        let state = synthetic_state(&[0.9, 0.5, 0.3, 0.8], &[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(restricted_candidates(&state, 0.0), vec![0, 1, 2, 3]);
        assert_eq!(restricted_candidates(&state, 0.5), vec![0, 1, 3]);
        assert_eq!(restricted_candidates(&state, 0.95), vec![0]);
    }

    #[test]
    fn extend_matches_two_point_closed_form() {
        let kernel = Kernel::gaussian(1.0).unwrap();
        let data = grid_1d(&[0.0, 1.0]);
        let mut state = init_state(&kernel, &data).unwrap();
        extend(&mut state, &kernel, 0).unwrap();
        let expected = (1.0 - (-2.0f64).exp()).sqrt();
        assert!((state.power_sq[1].sqrt() - expected).abs() < 1e-14);
        assert_eq!(state.power_sq[0], 0.0);
        assert!(state.residual[0].iter().all(|&r| r == 0.0));
    }

    #[test]
    fn extend_rejects_selected_and_dependent_points() {
        let kernel = Kernel::gaussian(1.0).unwrap();
        let data = Dataset::new(
            vec![vec![0.0], vec![0.0], vec![1.0]],
            vec![vec![1.0], vec![1.0], vec![2.0]],
        )
        .unwrap();
        let mut state = init_state(&kernel, &data).unwrap();
        extend(&mut state, &kernel, 0).unwrap();
        assert!(matches!(
            extend(&mut state, &kernel, 0),
            Err(Error::InvalidInput(_))
        ));
        // Candidate 1 coincides with the selected point, so its power clamps to 0.
        assert_eq!(state.power_sq[1], 0.0);
        assert!(matches!(
            extend(&mut state, &kernel, 1),
            Err(Error::Stability(_))
        ));
    }

    #[test]
    fn run_stops_immediately_on_zero_targets() {
        let kernel = Kernel::gaussian(1.0).unwrap();
        let data = synth(Generator::Zero, 20, 2, 2, 3).unwrap();
        let config = GreedyConfig::default();
        let (state, stop) = run(&kernel, &data, &config).unwrap();
        assert_eq!(stop, StopReason::ResidualTolerance);
        assert!(state.selected.is_empty());
    }

    #[test]
    fn power_selection_breaks_ties_by_smallest_index() {
        let kernel = Kernel::gaussian(1.0).unwrap();
        let data = grid_1d(&[-1.0, -0.5, 0.0, 0.5, 1.0]);
        let config = GreedyConfig {
            criterion: SelectionCriterion::PGreedy,
            tau_f: 0.0,
            max_points: Some(1),
            ..GreedyConfig::default()
        };
        let (state, stop) = run(&kernel, &data, &config).unwrap();
        assert_eq!(state.selected, vec![0]);
        assert_eq!(stop, StopReason::MaxPoints);
    }

    #[test]
    fn first_residual_choice_is_largest_output() {
        let kernel = Kernel::gaussian(1.0).unwrap();
        let data = synth(Generator::FrankeVec, 40, 2, 3, 11).unwrap();
        let expected = (0..data.len())
            .max_by(|&a, &b| {
                norm(data.output(a))
                    .partial_cmp(&norm(data.output(b)))
                    .unwrap()
            })
            .unwrap();
        let config = GreedyConfig {
            max_points: Some(1),
            ..GreedyConfig::default()
        };
        let (state, _) = run(&kernel, &data, &config).unwrap();
        assert_eq!(state.selected, vec![expected]);
    }

    #[test]
    fn run_reports_power_tolerance_without_adding_the_point() {
        let kernel = Kernel::gaussian(0.5).unwrap();
        let data = grid_1d(&[0.0, 0.001, 0.002, 5.0]);
        let config = GreedyConfig {
            criterion: SelectionCriterion::PGreedy,
            tau_f: 0.0,
            tau_p: 0.5,
            ..GreedyConfig::default()
        };
        let (state, stop) = run(&kernel, &data, &config).unwrap();
        assert_eq!(stop, StopReason::PowerTolerance);
        // The close cluster collapses under the tight tolerance long before
        // the candidate list is exhausted.
        assert!(state.selected.len() < data.len());
        for record in &state.trace {
            assert!(record.power_at_chosen >= 0.5);
        }
    }

    #[test]
    fn run_selects_everything_when_tolerances_allow() {
        let kernel = Kernel::gaussian(1.0).unwrap();
        let data = grid_1d(&[-1.0, -0.4, 0.2, 0.9]);
        let config = GreedyConfig {
            tau_f: 0.0,
            tau_p: 0.0,
            ..GreedyConfig::default()
        };
        let (state, stop) = run(&kernel, &data, &config).unwrap();
        assert_eq!(stop, StopReason::AllSelected);
        assert_eq!(state.selected.len(), data.len());
        let mut sorted = state.selected.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), data.len());
    }

    #[test]
    fn oracle_power_closed_forms() {
        let kernel = Kernel::gaussian(1.0).unwrap();
        assert_eq!(oracle_power(&kernel, &[], &[0.7]).unwrap(), 1.0);
        let centers = vec![vec![0.0]];
        let expected = (1.0 - (-2.0f64).exp()).sqrt();
        assert!((oracle_power(&kernel, &centers, &[1.0]).unwrap() - expected).abs() < 1e-14);
        assert!(oracle_power(&kernel, &centers, &[0.0]).unwrap() < 1e-9);
    }

    #[test]
    fn oracle_power_rejects_duplicate_centers() {
        let kernel = Kernel::gaussian(1.0).unwrap();
        let centers = vec![vec![0.5], vec![0.5]];
        assert!(oracle_power(&kernel, &centers, &[0.0]).is_err());
    }

    #[test]
    fn trace_power_is_non_increasing_with_zero_slack() {
        let kernel = Kernel::linear_matern(2.0).unwrap();
        let data = synth(Generator::FrankeVec, 120, 2, 2, 7).unwrap();
        let config = GreedyConfig {
            criterion: SelectionCriterion::FOverPGreedy,
            gamma: 0.3,
            tau_f: 0.0,
            tau_p: 1e-10,
            max_points: Some(80),
        };
        let (state, _) = run(&kernel, &data, &config).unwrap();
        assert!(state.trace.len() > 10);
        for pair in state.trace.windows(2) {
            assert!(pair[1].max_power <= pair[0].max_power);
        }
    }

    #[test]
    fn gamma_one_reduces_to_power_selection_for_all_criteria() {
        let kernel = Kernel::gaussian(2.0).unwrap();
        for seed in 0..3 {
            let data = synth(Generator::FrankeVec, 60, 2, 2, seed).unwrap();
            let reference = GreedyConfig {
                criterion: SelectionCriterion::PGreedy,
                gamma: 0.0,
                tau_f: 0.0,
                tau_p: 1e-8,
                max_points: Some(40),
            };
            let (ref_state, _) = run(&kernel, &data, &reference).unwrap();
            for criterion in [
                SelectionCriterion::FGreedy,
                SelectionCriterion::PGreedy,
                SelectionCriterion::FOverPGreedy,
            ] {
                let config = GreedyConfig {
                    criterion,
                    gamma: 1.0,
                    ..reference.clone()
                };
                let (state, _) = run(&kernel, &data, &config).unwrap();
                assert_eq!(state.selected, ref_state.selected, "criterion {criterion}");
            }
        }
    }

    /// Random selection orders must keep the incremental power values glued
    /// to the dense-solve oracle at every candidate after every step.
    #[test]
    fn incremental_power_matches_oracle_on_random_runs() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for case in 0..8 {
            let d = 1 + (case % 3);
            let n = 12 + (case * 3) % 18;
            let data = synth(Generator::FrankeVec, n, d, 1, 100 + case as u64).unwrap();
            let eps = 0.3 + rng.random_range(0.0..2.0);
            let kernel = if case % 2 == 0 {
                Kernel::gaussian(eps).unwrap()
            } else {
                Kernel::linear_matern(eps).unwrap()
            };
            let mut state = init_state(&kernel, &data).unwrap();
            for _ in 0..6 {
                // The power floor mirrors the default stability tolerance; below
                // it both routes drown in sqrt-amplified round-off by design.
                let unselected: Vec<usize> = (0..n)
                    .filter(|&i| !state.selected_mask[i] && state.power_sq[i] > 1e-6)
                    .collect();
                if unselected.is_empty() {
                    break;
                }
                let pick = unselected[rng.random_range(0..unselected.len())];
                extend(&mut state, &kernel, pick).unwrap();
                let centers = state.selected_points();
                for i in 0..n {
                    let oracle = oracle_power(&kernel, &centers, data.input(i)).unwrap();
                    let incremental = state.power_sq[i].sqrt();
                    assert!(
                        (incremental - oracle).abs() < 1e-8,
                        "case {case}: candidate {i} incremental {incremental} vs oracle {oracle}"
                    );
                }
            }
        }
    }

    #[test]
    fn criterion_strings_round_trip() {
        for c in [
            SelectionCriterion::FGreedy,
            SelectionCriterion::PGreedy,
            SelectionCriterion::FOverPGreedy,
        ] {
            assert_eq!(c.to_string().parse::<SelectionCriterion>().unwrap(), c);
        }
        assert!("fgreedy".parse::<SelectionCriterion>().is_err());
    }

    #[test]
    fn config_validation() {
        let ok = GreedyConfig::default();
        assert!(ok.validate().is_ok());
        assert!(GreedyConfig {
            gamma: -0.1,
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(GreedyConfig {
            gamma: 1.1,
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(GreedyConfig {
            tau_f: -1.0,
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(GreedyConfig {
            tau_p: f64::NAN,
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(GreedyConfig {
            max_points: Some(0),
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(GreedyConfig {
            tau_f: 0.0,
            tau_p: 0.0,
            ..ok
        }
        .validate()
        .is_ok());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        /// Larger gamma never admits a candidate that smaller gamma excludes.
        #[test]
        fn restricted_sets_are_nested(
            powers in proptest::collection::vec(0.0f64..1.0, 2..30),
            g1 in 0.0f64..=1.0,
            g2 in 0.0f64..=1.0,
        ) {
            let residuals: Vec<f64> = powers.iter().map(|p| 1.0 - p).collect();
            let state = synthetic_state(&powers, &residuals);
            let (lo, hi) = if g1 <= g2 { (g1, g2) } else { (g2, g1) };
            let wide = restricted_candidates(&state, lo);
            let narrow = restricted_candidates(&state, hi);
            prop_assert!(narrow.iter().all(|i| wide.contains(i)));
            prop_assert!(!wide.is_empty());
        }

        /// Unrestricted argmax equals the plain indicator argmax.
        #[test]
        fn gamma_zero_is_plain_argmax(
            powers in proptest::collection::vec(0.01f64..1.0, 2..30),
            residuals in proptest::collection::vec(0.0f64..5.0, 2..30),
            criterion_pick in 0usize..3,
        ) {
            let m = powers.len().min(residuals.len());
            let state = synthetic_state(&powers[..m], &residuals[..m]);
            let criterion = [
                SelectionCriterion::FGreedy,
                SelectionCriterion::PGreedy,
                SelectionCriterion::FOverPGreedy,
            ][criterion_pick];
            let config = GreedyConfig { criterion, gamma: 0.0, ..GreedyConfig::default() };
            let chosen = restricted_argmax(&state, &config).unwrap();
            let values = indicator(&state, criterion);
            let plain = (0..m)
                .max_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap()
                    .then(b.cmp(&a)))
                .unwrap();
            prop_assert_eq!(chosen, plain);
        }

        /// Full runs never pick the same candidate twice and keep the
        /// interpolation exactness invariants at all selected points.
        #[test]
        fn runs_never_reselect_and_interpolate_exactly(
            seed in 0u64..50,
            criterion_pick in 0usize..3,
            gamma in 0.0f64..=1.0,
        ) {
            let data = synth(Generator::FrankeVec, 30, 2, 2, seed).unwrap();
            let kernel = Kernel::gaussian(1.0).unwrap();
            let criterion = [
                SelectionCriterion::FGreedy,
                SelectionCriterion::PGreedy,
                SelectionCriterion::FOverPGreedy,
            ][criterion_pick];
            let config = GreedyConfig {
                criterion,
                gamma,
                tau_f: 1e-10,
                tau_p: 1e-6,
                max_points: Some(25),
            };
            let (state, _) = run(&kernel, &data, &config).unwrap();
            let mut seen = state.selected.clone();
            seen.sort_unstable();
            seen.dedup();
            prop_assert_eq!(seen.len(), state.selected.len());
            for &i in &state.selected {
                prop_assert!(state.power_sq[i] <= 1e-10);
                prop_assert!(norm(&state.residual[i]) <= 1e-8);
            }
        }
    }
}
