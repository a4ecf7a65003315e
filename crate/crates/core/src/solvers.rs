//! Iterative KL-projection solvers: the Dykstra band repair, the plain
//! alternating-projection baseline and the barycentre coupling together with
//! its group-wise splitting maps.

use std::sync::Arc;

use ndarray::{Array2, Axis, Zip};
use serde::{Deserialize, Serialize};

use crate::distributions::{same_support, SimplexVector, Support};
use crate::error::{Error, Result};
use crate::transport::{
    gibbs_kernel, prox_band_in_place, prox_cols_in_place, prox_rows_in_place, BandConstraint,
    CostMatrix, Coupling, KERNEL_FLOOR,
};

pub const DEFAULT_BASELINE_ITERATIONS: usize = 400;
pub const DEFAULT_BARYCENTRE_ITERATIONS: usize = 400;
pub const DEFAULT_REPAIR_ITERATIONS: usize = 600;

/// Column residual required, on top of the band test, by
/// [`EarlyExit::Converged`].
pub const MARGINAL_RESIDUAL_STOP: f64 = 1e-6;

/// Correction ratios are capped here so `0 · q` stays `0`.
const CORRECTION_CAP: f64 = 1e300;

/// One of the three convex sets the solvers project onto.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintSet {
    Rows,
    Cols,
    Band,
}

impl ConstraintSet {
    fn slot(self) -> usize {
        match self {
            ConstraintSet::Rows => 0,
            ConstraintSet::Cols => 1,
            ConstraintSet::Band => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StopReason {
    MaxIterations,
    BandResidualBelowVarepsilon,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StopReason::MaxIterations => "MaxIterations",
            StopReason::BandResidualBelowVarepsilon => "BandResidualBelowVarepsilon",
        })
    }
}

/// Residuals after one projection step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord {
    pub set: ConstraintSet,
    /// `‖γ1 − P‖₁`
    pub row_residual: f64,
    /// `‖γ'1 − Q‖₁`
    pub col_residual: f64,
    /// `‖γ'V‖₁`, absent for solvers without a band.
    pub band_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverTrace {
    pub records: Vec<IterationRecord>,
    pub stop_reason: StopReason,
}

impl SolverTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }
}

/// How the Dykstra corrections are paired with projections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DykstraSchedule {
    /// Each set keeps its own multiplicative correction, refreshed every
    /// time that set is projected onto.
    #[default]
    Cyclic,
    /// Literal transcription of the published index recursion: the
    /// correction used at step `k` is `γ⁽ᵏ⁻⁴⁾/γ⁽ᵏ⁻³⁾` for `k ≤ 7` and
    /// `q_{k−7} ⊙ γ⁽ᵏ⁻⁴⁾/γ⁽ᵏ⁻³⁾` afterwards.
    Verbatim,
}

/// Where the `‖γ'V‖₁ < varepsilon` early-exit test is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EarlyExit {
    /// After row projections from step 4 on, and only once the column
    /// residual is at most [`MARGINAL_RESIDUAL_STOP`].
    #[default]
    Converged,
    /// After every projection from step 4 on. With `Λ = 0` this fires right
    /// after the first band projection, whatever the marginals look like.
    EveryStep,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DykstraOptions {
    pub iterations: usize,
    pub varepsilon: f64,
    pub schedule: DykstraSchedule,
    pub early_exit: EarlyExit,
}

impl Default for DykstraOptions {
    fn default() -> Self {
        DykstraOptions {
            iterations: DEFAULT_REPAIR_ITERATIONS,
            varepsilon: 1e-4,
            schedule: DykstraSchedule::Cyclic,
            early_exit: EarlyExit::Converged,
        }
    }
}

/// Set projected onto at step `k` (1-based): `C₁, C₂, C₃`, then
/// `C_{1 + (k mod 3)}`.
pub fn dykstra_set(k: usize) -> ConstraintSet {
    let index = if k <= 3 { k } else { 1 + k % 3 };
    match index {
        1 => ConstraintSet::Rows,
        2 => ConstraintSet::Cols,
        _ => ConstraintSet::Band,
    }
}

/// Set projected onto at step `k` (1-based) of the alternating baseline:
/// `C_{1 + (k mod 2)}`.
pub fn baseline_set(k: usize) -> ConstraintSet {
    if k % 2 == 1 {
        ConstraintSet::Cols
    } else {
        ConstraintSet::Rows
    }
}

fn l1_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

struct Problem<'a> {
    p: &'a [f64],
    q: &'a [f64],
    band: Option<&'a BandConstraint>,
}

impl Problem<'_> {
    fn project(&self, set: ConstraintSet, gamma: &mut Array2<f64>) -> Result<()> {
        match set {
            ConstraintSet::Rows => prox_rows_in_place(gamma, self.p),
            ConstraintSet::Cols => prox_cols_in_place(gamma, self.q),
            ConstraintSet::Band => match self.band {
                Some(b) => prox_band_in_place(gamma, b),
                None => Ok(()),
            },
        }
    }

    fn record(&self, set: ConstraintSet, gamma: &Array2<f64>) -> IterationRecord {
        let rows = gamma.sum_axis(Axis(1));
        let cols = gamma.sum_axis(Axis(0));
        let band_residual = self
            .band
            .map(|b| b.column_loads(gamma.view()).iter().map(|x| x.abs()).sum());
        IterationRecord {
            set,
            row_residual: l1_diff(rows.as_slice().unwrap(), self.p),
            col_residual: l1_diff(cols.as_slice().unwrap(), self.q),
            band_residual,
        }
    }
}

/// `a / b` with denominators clamped at the kernel floor and `0/0 = 1`.
fn correction_ratio(num: &Array2<f64>, den: &Array2<f64>) -> Array2<f64> {
    let mut out = Array2::zeros(num.dim());
    Zip::from(&mut out).and(num).and(den).for_each(|o, &a, &b| {
        *o = if a == 0.0 && b == 0.0 {
            1.0
        } else {
            (a / b.max(KERNEL_FLOOR)).min(CORRECTION_CAP)
        };
    });
    out
}

fn check_marginals(p: &SimplexVector, q: &SimplexVector, cost: &CostMatrix) -> Result<()> {
    if cost.shape() != (p.len(), q.len()) {
        return Err(Error::DimensionMismatch {
            expected: p.len() * q.len(),
            actual: cost.shape().0 * cost.shape().1,
        });
    }
    Ok(())
}

/// Alternating row/column KL projections starting from `exp(−C/ε)`.
///
/// Step `k` projects onto `C_{1+(k mod 2)}`, so the first step fixes the
/// columns and an even `iterations` ends on the rows.
pub fn bregman_baseline(
    p: &SimplexVector,
    q: &SimplexVector,
    cost: &CostMatrix,
    epsilon: f64,
    iterations: usize,
) -> Result<(Coupling, SolverTrace)> {
    if iterations == 0 {
        return Err(Error::InvalidArgument(
            "iterations must be at least 1".into(),
        ));
    }
    check_marginals(p, q, cost)?;
    let problem = Problem {
        p: p.values(),
        q: q.values(),
        band: None,
    };
    let mut gamma = gibbs_kernel(cost, epsilon)?;
    let mut records = Vec::with_capacity(iterations);
    for k in 1..=iterations {
        let set = baseline_set(k);
        problem.project(set, &mut gamma)?;
        records.push(problem.record(set, &gamma));
    }
    let coupling = Coupling::new(gamma, p.support().clone(), q.support().clone())?;
    Ok((
        coupling,
        SolverTrace {
            records,
            stop_reason: StopReason::MaxIterations,
        },
    ))
}

/// Dykstra's algorithm with KL projections onto
/// `{γ1 = P} ∩ {γ'1 = Q} ∩ {−Λ ≤ γ'V ≤ Λ}`.
///
/// The early-exit test `‖γ'V‖₁ < varepsilon` is placed according to
/// `options.early_exit`; see [`EarlyExit`].
pub fn dykstra_repair(
    p: &SimplexVector,
    q: &SimplexVector,
    band: &BandConstraint,
    cost: &CostMatrix,
    epsilon: f64,
    options: &DykstraOptions,
) -> Result<(Coupling, SolverTrace)> {
    if options.iterations < 4 {
        return Err(Error::InvalidArgument(
            "Dykstra needs at least 4 iterations".into(),
        ));
    }
    if !(options.varepsilon > 0.0) {
        return Err(Error::InvalidArgument("varepsilon must be positive".into()));
    }
    check_marginals(p, q, cost)?;
    if !same_support(p.support(), band.repair_vector().support()) {
        return Err(Error::SupportMismatch);
    }
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            actual: q.len(),
        });
    }
    let problem = Problem {
        p: p.values(),
        q: q.values(),
        band: Some(band),
    };
    let gamma = gibbs_kernel(cost, epsilon)?;
    let (gamma, trace) = match options.schedule {
        DykstraSchedule::Cyclic => run_cyclic(&problem, gamma, options)?,
        DykstraSchedule::Verbatim => run_verbatim(&problem, gamma, options)?,
    };
    let coupling = Coupling::new(gamma, p.support().clone(), q.support().clone())?;
    Ok((coupling, trace))
}

fn should_stop(k: usize, rec: &IterationRecord, options: &DykstraOptions) -> bool {
    let band_ok = rec.band_residual.is_some_and(|b| b < options.varepsilon);
    k >= 4
        && band_ok
        && match options.early_exit {
            EarlyExit::EveryStep => true,
            EarlyExit::Converged => {
                rec.set == ConstraintSet::Rows && rec.col_residual <= MARGINAL_RESIDUAL_STOP
            }
        }
}

fn run_cyclic(
    problem: &Problem<'_>,
    mut gamma: Array2<f64>,
    options: &DykstraOptions,
) -> Result<(Array2<f64>, SolverTrace)> {
    let mut corrections: [Option<Array2<f64>>; 3] = [None, None, None];
    let mut records = Vec::with_capacity(options.iterations);
    let mut stop_reason = StopReason::MaxIterations;
    for k in 1..=options.iterations {
        let set = dykstra_set(k);
        let slot = &mut corrections[set.slot()];
        let mut corrected = match slot {
            Some(q) => &gamma * &*q,
            None => gamma.clone(),
        };
        let pre = corrected.clone();
        problem.project(set, &mut corrected)?;
        *slot = Some(correction_ratio(&pre, &corrected));
        gamma = corrected;
        let rec = problem.record(set, &gamma);
        records.push(rec);
        if should_stop(k, &rec, options) {
            stop_reason = StopReason::BandResidualBelowVarepsilon;
            break;
        }
    }
    Ok((
        gamma,
        SolverTrace {
            records,
            stop_reason,
        },
    ))
}

fn run_verbatim(
    problem: &Problem<'_>,
    gamma0: Array2<f64>,
    options: &DykstraOptions,
) -> Result<(Array2<f64>, SolverTrace)> {
    // history[k] = γ⁽ᵏ⁾, only the last four are kept
    let mut history: std::collections::VecDeque<Array2<f64>> = std::collections::VecDeque::new();
    // q_m for the last four m
    let mut qs: std::collections::VecDeque<Array2<f64>> = std::collections::VecDeque::new();
    let mut records = Vec::with_capacity(options.iterations);
    let mut stop_reason = StopReason::MaxIterations;
    history.push_back(gamma0);
    for k in 1..=options.iterations {
        let set = dykstra_set(k);
        let prev = history.back().unwrap();
        let mut next = if k <= 3 {
            prev.clone()
        } else {
            // history holds γ⁽ᵏ⁻⁴⁾ … γ⁽ᵏ⁻¹⁾
            let ratio = correction_ratio(&history[0], &history[1]);
            let q = if k <= 7 { ratio } else { &qs[0] * &ratio };
            let input = prev * &q;
            if qs.len() == 4 {
                qs.pop_front();
            }
            qs.push_back(q);
            input
        };
        problem.project(set, &mut next)?;
        let rec = problem.record(set, &next);
        records.push(rec);
        if history.len() == 4 {
            history.pop_front();
        }
        history.push_back(next);
        if should_stop(k, &rec, options) {
            stop_reason = StopReason::BandResidualBelowVarepsilon;
            break;
        }
    }
    Ok((
        history.pop_back().unwrap(),
        SolverTrace {
            records,
            stop_reason,
        },
    ))
}

/// Entropic coupling between the two group-conditional distributions
/// (group 0 on rows, group 1 on columns).
pub fn barycentre_coupling(
    p0: &SimplexVector,
    p1: &SimplexVector,
    cost: &CostMatrix,
    epsilon: f64,
    iterations: usize,
) -> Result<(Coupling, SolverTrace)> {
    if !same_support(p0.support(), p1.support()) {
        return Err(Error::SupportMismatch);
    }
    bregman_baseline(p0, p1, cost, epsilon, iterations)
}

/// Splits a barycentre coupling into the per-group transport plans onto the
/// barycentre.
///
/// Mass `γᴮ_{a,b}` between group-0 index `a` and group-1 index `b` lands on
/// the barycentric index `round(π0·a + π1·b)` (ties to even). The first
/// returned matrix is indexed `[a, t]`, the second `[b, t]`.
pub fn barycentre_maps(
    coupling: &Array2<f64>,
    pi0: f64,
    pi1: f64,
    support: &Support,
) -> Result<(Array2<f64>, Array2<f64>)> {
    if !(pi0 >= 0.0 && pi1 >= 0.0) || (pi0 + pi1 - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "barycentric weights must be nonnegative and sum to 1, got {pi0} and {pi1}"
        )));
    }
    let n = support.len();
    if coupling.dim() != (n, n) {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            actual: coupling.len(),
        });
    }
    if support.uniform_spacing().is_none() {
        return Err(Error::UnevenSupport(format!(
            "{n} points of dimension {}",
            support.dim()
        )));
    }
    let mut to_bary0 = Array2::zeros((n, n));
    let mut to_bary1 = Array2::zeros((n, n));
    for ((a, b), &m) in coupling.indexed_iter() {
        if m == 0.0 {
            continue;
        }
        let t = (pi0 * a as f64 + pi1 * b as f64).round_ties_even() as usize;
        let t = t.min(n - 1);
        to_bary0[(a, t)] += m;
        to_bary1[(b, t)] += m;
    }
    Ok((to_bary0, to_bary1))
}

/// Convenience: the support shared by both marginals of a square coupling.
pub fn square_support(coupling: &Coupling) -> Result<Arc<Support>> {
    if !same_support(coupling.source(), coupling.target()) {
        return Err(Error::SupportMismatch);
    }
    Ok(coupling.source().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{make_simplex, RepairVector};
    use crate::transport::cost_matrix;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn grid(n: i64) -> Arc<Support> {
        Arc::new(Support::integer_range(0, n - 1).unwrap())
    }

    #[test]
    fn schedules() {
        use ConstraintSet::*;
        let seq: Vec<_> = (1..=9).map(dykstra_set).collect();
        assert_eq!(
            seq,
            vec![Rows, Cols, Band, Cols, Band, Rows, Cols, Band, Rows]
        );
        assert_eq!(dykstra_set(600), Rows);
        assert_eq!(baseline_set(1), Cols);
        assert_eq!(baseline_set(400), Rows);
    }

    #[test]
    fn baseline_dirac() {
        let s = grid(3);
        let d = SimplexVector::dirac(0, s.clone()).unwrap();
        let c = cost_matrix(&s, &s, &[1.0]).unwrap();
        let (g, trace) = bregman_baseline(&d, &d, &c, 0.5, 10).unwrap();
        assert_eq!(trace.iterations(), 10);
        let mut expected = Array2::zeros((3, 3));
        expected[(0, 0)] = 1.0;
        assert_eq!(g.entries(), &expected);
    }

    /// Exact entropic OT on two points with uniform marginals: the plan is
    /// `[[a, 1/2−a], [1/2−a, a]]`; the minimiser of `⟨C,γ⟩ − εE(γ)` zeroes
    /// `−2c + 2ε(ln a − ln(1/2 − a))`, found here by bisection.
    fn two_point_oracle(cost_off: f64, eps: f64) -> f64 {
        let grad = |a: f64| -2.0 * cost_off + 2.0 * eps * (a.ln() - (0.5 - a).ln());
        let (mut lo, mut hi) = (1e-300, 0.5 - 1e-17);
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if grad(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn baseline_two_point_matches_oracle() {
        let s = grid(2);
        let u = SimplexVector::uniform(s.clone());
        let c = cost_matrix(&s, &s, &[1.0]).unwrap();
        for eps in [1.0, 0.3, 0.05] {
            let (g, _) = bregman_baseline(&u, &u, &c, eps, 50).unwrap();
            let a = two_point_oracle(1.0, eps);
            assert_abs_diff_eq!(g.entries()[(0, 0)], a, epsilon = 1e-9);
            assert_abs_diff_eq!(g.entries()[(0, 1)], 0.5 - a, epsilon = 1e-9);
        }
        let (g, _) = bregman_baseline(&u, &u, &c, 0.05, 50).unwrap();
        assert_abs_diff_eq!(g.entries()[(0, 0)], 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(g.entries()[(1, 1)], 0.5, epsilon = 1e-6);
    }

    #[test]
    fn dykstra_zero_vector_reduces_to_alternating_projections() {
        let s = grid(4);
        let p = make_simplex(vec![0.1, 0.2, 0.3, 0.4], s.clone()).unwrap();
        let q = make_simplex(vec![0.4, 0.3, 0.2, 0.1], s.clone()).unwrap();
        let c = cost_matrix(&s, &s, &[1.0]).unwrap();
        let band = BandConstraint::uniform(RepairVector::zeros(s.clone()), 0.0).unwrap();
        let opts = DykstraOptions {
            iterations: 3000,
            varepsilon: 1e-300,
            ..Default::default()
        };
        let (g, trace) = dykstra_repair(&p, &q, &band, &c, 0.5, &opts).unwrap();
        // γ'V is identically zero, so the run ends once the marginals settle
        assert_eq!(trace.stop_reason, StopReason::BandResidualBelowVarepsilon);
        assert!(trace.last().unwrap().col_residual <= MARGINAL_RESIDUAL_STOP);
        let (b, _) = bregman_baseline(&p, &q, &c, 0.5, 2000).unwrap();
        let diff: f64 = (g.entries() - b.entries()).iter().map(|x| x.abs()).sum();
        assert!(diff <= 1e-5, "diff {diff}");
    }

    #[test]
    fn dykstra_observation_instance() {
        let s = grid(2);
        let px = make_simplex(vec![0.5, 0.5], s.clone()).unwrap();
        let v = RepairVector::new(vec![-2.0 / 3.0, 2.0 / 3.0], s.clone()).unwrap();
        let band = BandConstraint::uniform(v, 0.0).unwrap();
        let c = cost_matrix(&s, &s, &[1.0]).unwrap();
        let opts = DykstraOptions {
            iterations: 200,
            varepsilon: 1e-10,
            ..Default::default()
        };
        let (g, trace) = dykstra_repair(&px, &px, &band, &c, 0.1, &opts).unwrap();
        assert_eq!(trace.stop_reason, StopReason::BandResidualBelowVarepsilon);
        // the only coupling in the polytope with γ'V = 0 is the uniform one
        for x in g.entries().iter() {
            assert_abs_diff_eq!(*x, 0.25, epsilon = 1e-9);
        }
    }

    #[test]
    fn dykstra_rejects_short_runs() {
        let s = grid(2);
        let px = SimplexVector::uniform(s.clone());
        let band = BandConstraint::uniform(RepairVector::zeros(s.clone()), 0.0).unwrap();
        let c = cost_matrix(&s, &s, &[1.0]).unwrap();
        let opts = DykstraOptions {
            iterations: 3,
            ..Default::default()
        };
        assert!(dykstra_repair(&px, &px, &band, &c, 0.1, &opts).is_err());
    }

    #[test]
    fn barycentre_dirac_and_diagonal() {
        let s = grid(3);
        let d = SimplexVector::dirac(0, s.clone()).unwrap();
        let c = cost_matrix(&s, &s, &[1.0]).unwrap();
        let (g, _) = barycentre_coupling(&d, &d, &c, 0.1, 20).unwrap();
        assert_eq!(g.entries()[(0, 0)], 1.0);
        assert_eq!(g.total_mass(), 1.0);

        let u = SimplexVector::uniform(grid(2));
        let c2 = cost_matrix(&grid(2), &grid(2), &[1.0]).unwrap();
        let (g, _) = barycentre_coupling(&u, &u, &c2, 0.05, 50).unwrap();
        let a = two_point_oracle(1.0, 0.05);
        assert_abs_diff_eq!(g.entries()[(0, 0)], a, epsilon = 1e-9);
        assert!(g.entries()[(0, 0)] > 100.0 * g.entries()[(0, 1)]);
    }

    #[test]
    fn barycentre_map_cases() {
        let s = Support::integer_range(0, 2).unwrap();
        let mut gb = Array2::zeros((3, 3));
        gb[(0, 2)] = 1.0;
        let (m0, m1) = barycentre_maps(&gb, 0.5, 0.5, &s).unwrap();
        assert_eq!(m0[(0, 1)], 1.0);
        assert_eq!(m1[(2, 1)], 1.0);
        assert_eq!(m0.sum(), 1.0);

        let gb = array![[0.2, 0.1, 0.0], [0.0, 0.3, 0.1], [0.1, 0.0, 0.2]];
        let (m0, _) = barycentre_maps(&gb, 1.0, 0.0, &s).unwrap();
        for a in 0..3 {
            assert_abs_diff_eq!(m0[(a, a)], gb.row(a).sum(), epsilon = 1e-15);
        }
        let (m0, _) = barycentre_maps(
            &Array2::from_diag(&ndarray::arr1(&[0.3, 0.3, 0.4])),
            0.5,
            0.5,
            &s,
        )
        .unwrap();
        assert_eq!(m0[(1, 1)], 0.3);

        let uneven = Support::scalar([0.0, 1.0, 3.0]).unwrap();
        assert!(matches!(
            barycentre_maps(&gb, 0.5, 0.5, &uneven),
            Err(Error::UnevenSupport(_))
        ));
        assert!(barycentre_maps(&gb, 0.6, 0.6, &s).is_err());
    }

    #[test]
    fn dykstra_is_deterministic() {
        let s = grid(5);
        let p = make_simplex(vec![0.3, 0.25, 0.2, 0.15, 0.1], s.clone()).unwrap();
        let p0 = make_simplex(vec![0.5, 0.3, 0.1, 0.05, 0.05], s.clone()).unwrap();
        let p1 = make_simplex(vec![0.1, 0.2, 0.3, 0.25, 0.15], s.clone()).unwrap();
        let px = make_simplex(
            p0.values()
                .iter()
                .zip(p1.values())
                .map(|(a, b)| 0.5 * a + 0.5 * b)
                .collect(),
            s.clone(),
        )
        .unwrap();
        let v = crate::distributions::repair_vector(&px, &p0, &p1).unwrap();
        let band = BandConstraint::uniform(v, 1e-3).unwrap();
        let c = cost_matrix(&s, &s, &[1.0]).unwrap();
        let opts = DykstraOptions {
            iterations: 60,
            ..Default::default()
        };
        let a = dykstra_repair(&px, &p, &band, &c, 0.2, &opts).unwrap();
        let b = dykstra_repair(&px, &p, &band, &c, 0.2, &opts).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }
}
