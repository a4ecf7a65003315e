//! Cost matrices, the Gibbs kernel, entropy and KL functionals, and the KL
//! projections used by the solvers.
//!
//! Every projection takes a nonnegative matrix `γ̄` and returns
//! `argmin_{γ ∈ C} KL(γ ‖ γ̄)` for its convex set `C`:
//!
//! | function | set |
//! |---|---|
//! | [`prox_rows`] | `γ1 = P` |
//! | [`prox_cols`] | `γ'1 = Q` |
//! | [`prox_rows_leq`] | `γ1 ≤ P` |
//! | [`prox_cols_leq`] | `γ'1 ≤ Q` |
//! | [`prox_total_mass`] | `1'γ1 = η` |
//! | [`prox_capacity`] | `γ ≤ Λcap` |
//! | [`prox_band`] | `−Λ ≤ γ'V ≤ Λ` |

use std::sync::Arc;

use ndarray::{Array2, ArrayView2, Axis, Zip};

use crate::distributions::{RepairVector, Support};
use crate::error::{Error, Result};

/// Lower bound applied to Gibbs kernel entries so the KL reference stays
/// strictly positive after underflow.
pub const KERNEL_FLOOR: f64 = 1e-300;

/// Largest exponent magnitude the band root search may reach.
pub const EXP_LIMIT: f64 = 700.0;

/// Relative tolerance of the band root search.
pub const NU_TOLERANCE: f64 = 1e-10;

/// Weighted-L1 transport cost between two supports.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    entries: Array2<f64>,
    weights: Vec<f64>,
}

impl CostMatrix {
    /// Wraps a precomputed nonnegative cost matrix.
    pub fn from_entries(entries: Array2<f64>) -> Result<Self> {
        if let Some(((i, j), v)) = entries
            .indexed_iter()
            .find(|(_, v)| !(**v >= 0.0) || !v.is_finite())
        {
            return Err(Error::InvalidArgument(format!(
                "cost entry ({i}, {j}) is {v}, costs must be finite and nonnegative"
            )));
        }
        Ok(CostMatrix {
            entries,
            weights: Vec::new(),
        })
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    /// Per-coordinate weights; empty when built from raw entries.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn shape(&self) -> (usize, usize) {
        self.entries.dim()
    }
}

/// `C_{i,j} = ‖ϱ ⊙ (src_i − tgt_j)‖₁`.
pub fn cost_matrix(src: &Support, tgt: &Support, weights: &[f64]) -> Result<CostMatrix> {
    if src.dim() != tgt.dim() {
        return Err(Error::DimensionMismatch {
            expected: src.dim(),
            actual: tgt.dim(),
        });
    }
    if weights.len() != src.dim() {
        return Err(Error::DimensionMismatch {
            expected: src.dim(),
            actual: weights.len(),
        });
    }
    if let Some((index, &value)) = weights
        .iter()
        .enumerate()
        .find(|(_, w)| !(**w > 0.0) || !w.is_finite())
    {
        return Err(Error::NonPositiveWeight { index, value });
    }
    let entries = Array2::from_shape_fn((src.len(), tgt.len()), |(i, j)| {
        src.point(i)
            .coords()
            .iter()
            .zip(tgt.point(j).coords())
            .zip(weights)
            .map(|((a, b), w)| w * (a - b).abs())
            .sum()
    });
    Ok(CostMatrix {
        entries,
        weights: weights.to_vec(),
    })
}

/// `ξ = exp(−C/ε)`, floored at [`KERNEL_FLOOR`].
pub fn gibbs_kernel(cost: &CostMatrix, epsilon: f64) -> Result<Array2<f64>> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::NonPositiveEpsilon(epsilon));
    }
    Ok(cost
        .entries
        .mapv(|c| (-c / epsilon).exp().max(KERNEL_FLOOR)))
}

/// `E(γ) = −Σ γ(log γ − 1)` with `0 log 0 = 0`.
pub fn entropy(gamma: ArrayView2<f64>) -> f64 {
    -gamma
        .iter()
        .filter(|&&g| g > 0.0)
        .map(|&g| g * (g.ln() - 1.0))
        .sum::<f64>()
}

/// `KL(γ‖ξ) = Σ γ(log(γ/ξ) − 1)`; zero entries of `γ` contribute nothing.
pub fn kl_divergence(gamma: ArrayView2<f64>, reference: ArrayView2<f64>) -> Result<f64> {
    if gamma.dim() != reference.dim() {
        return Err(Error::DimensionMismatch {
            expected: reference.len(),
            actual: gamma.len(),
        });
    }
    if let Some(((row, col), &value)) = reference.indexed_iter().find(|(_, x)| !(**x > 0.0)) {
        return Err(Error::NonPositiveReference { row, col, value });
    }
    let mut total = 0.0;
    for (&g, &x) in gamma.iter().zip(reference.iter()) {
        if g > 0.0 {
            total += g * ((g / x).ln() - 1.0);
        }
    }
    Ok(total)
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::LengthMismatch { expected, actual });
    }
    Ok(())
}

/// Rescales row `i` to mass `marg[i]` in place. With `at_most`, rows already
/// at or below their bound are left alone.
fn scale_rows_in_place(gamma: &mut Array2<f64>, marg: &[f64], at_most: bool) -> Result<()> {
    check_len(gamma.nrows(), marg.len())?;
    for (i, mut row) in gamma.axis_iter_mut(Axis(0)).enumerate() {
        let target = marg[i];
        let sum: f64 = row.sum();
        if at_most && sum <= target {
            continue;
        }
        if target == 0.0 {
            row.fill(0.0);
        } else if sum > 0.0 {
            let factor = target / sum;
            if factor.is_finite() {
                row.mapv_inplace(|g| g * factor);
            } else {
                // subnormal sums: dividing first keeps the result finite
                row.mapv_inplace(|g| (g / sum) * target);
            }
        } else {
            return Err(Error::ZeroRowWithMass {
                row: i,
                mass: target,
            });
        }
    }
    Ok(())
}

fn scale_cols_in_place(gamma: &mut Array2<f64>, marg: &[f64], at_most: bool) -> Result<()> {
    check_len(gamma.ncols(), marg.len())?;
    for (j, mut col) in gamma.axis_iter_mut(Axis(1)).enumerate() {
        let target = marg[j];
        let sum: f64 = col.sum();
        if at_most && sum <= target {
            continue;
        }
        if target == 0.0 {
            col.fill(0.0);
        } else if sum > 0.0 {
            let factor = target / sum;
            if factor.is_finite() {
                col.mapv_inplace(|g| g * factor);
            } else {
                col.mapv_inplace(|g| (g / sum) * target);
            }
        } else {
            return Err(Error::ZeroColumnWithMass {
                col: j,
                mass: target,
            });
        }
    }
    Ok(())
}

/// Projection onto `{γ ≥ 0 : γ1 = P}`: `diag(P / γ̄1) γ̄`.
pub fn prox_rows(gamma: ArrayView2<f64>, p: &[f64]) -> Result<Array2<f64>> {
    let mut out = gamma.to_owned();
    prox_rows_in_place(&mut out, p)?;
    Ok(out)
}

pub(crate) fn prox_rows_in_place(gamma: &mut Array2<f64>, p: &[f64]) -> Result<()> {
    scale_rows_in_place(gamma, p, false)
}

/// Projection onto `{γ ≥ 0 : γ'1 = Q}`: `γ̄ diag(Q / γ̄'1)`.
pub fn prox_cols(gamma: ArrayView2<f64>, q: &[f64]) -> Result<Array2<f64>> {
    let mut out = gamma.to_owned();
    prox_cols_in_place(&mut out, q)?;
    Ok(out)
}

pub(crate) fn prox_cols_in_place(gamma: &mut Array2<f64>, q: &[f64]) -> Result<()> {
    scale_cols_in_place(gamma, q, false)
}

/// Projection onto `{γ ≥ 0 : γ1 ≤ P}`: `diag(min(1, P / γ̄1)) γ̄`.
pub fn prox_rows_leq(gamma: ArrayView2<f64>, p: &[f64]) -> Result<Array2<f64>> {
    let mut out = gamma.to_owned();
    scale_rows_in_place(&mut out, p, true)?;
    Ok(out)
}

/// Projection onto `{γ ≥ 0 : γ'1 ≤ Q}`: `γ̄ diag(min(1, Q / γ̄'1))`.
pub fn prox_cols_leq(gamma: ArrayView2<f64>, q: &[f64]) -> Result<Array2<f64>> {
    let mut out = gamma.to_owned();
    scale_cols_in_place(&mut out, q, true)?;
    Ok(out)
}

/// Projection onto `{γ ≥ 0 : 1'γ1 = η}`: `γ̄ η / (1'γ̄1)`.
pub fn prox_total_mass(gamma: ArrayView2<f64>, eta: f64) -> Result<Array2<f64>> {
    if !(eta >= 0.0) || !eta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "total mass must be nonnegative, got {eta}"
        )));
    }
    let total = gamma.sum();
    if eta == 0.0 {
        return Ok(Array2::zeros(gamma.dim()));
    }
    if !(total > 0.0) {
        return Err(Error::ZeroTotalMass(eta));
    }
    Ok(gamma.mapv(|g| (g / total) * eta))
}

/// Projection onto `{γ ≥ 0 : γ ≤ Λcap}`: elementwise `min(γ̄, Λcap)`.
pub fn prox_capacity(gamma: ArrayView2<f64>, capacity: ArrayView2<f64>) -> Result<Array2<f64>> {
    if gamma.dim() != capacity.dim() {
        return Err(Error::DimensionMismatch {
            expected: gamma.len(),
            actual: capacity.len(),
        });
    }
    if capacity.iter().any(|c| !(*c >= 0.0)) {
        return Err(Error::InvalidArgument(
            "capacities must be nonnegative".into(),
        ));
    }
    let mut out = gamma.to_owned();
    Zip::from(&mut out)
        .and(&capacity)
        .for_each(|g, &c| *g = g.min(c));
    Ok(out)
}

/// The column-wise band `−Λ ≤ γ'V ≤ Λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandConstraint {
    v: RepairVector,
    lambda: Vec<f64>,
}

impl BandConstraint {
    pub fn new(v: RepairVector, lambda: Vec<f64>) -> Result<Self> {
        check_len(v.len(), lambda.len())?;
        if let Some((j, l)) = lambda.iter().enumerate().find(|(_, l)| !(**l >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "band width {j} is {l}, must be >= 0"
            )));
        }
        Ok(BandConstraint { v, lambda })
    }

    /// Same width `λ` on every column.
    pub fn uniform(v: RepairVector, lambda: f64) -> Result<Self> {
        let n = v.len();
        Self::new(v, vec![lambda; n])
    }

    pub fn repair_vector(&self) -> &RepairVector {
        &self.v
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn lambda_l1(&self) -> f64 {
        self.lambda.iter().sum()
    }

    /// `[γ'V]_j` summed over the active rows.
    pub fn column_loads(&self, gamma: ArrayView2<f64>) -> Vec<f64> {
        let v = self.v.values();
        (0..gamma.ncols())
            .map(|j| self.v.active().iter().map(|&i| gamma[(i, j)] * v[i]).sum())
            .collect()
    }

    /// `Σ_j max(0, |[γ'V]_j| − Λ_j)`.
    pub fn violation(&self, gamma: ArrayView2<f64>) -> f64 {
        self.column_loads(gamma)
            .iter()
            .zip(&self.lambda)
            .map(|(s, l)| (s.abs() - l).max(0.0))
            .sum()
    }

    pub fn contains(&self, gamma: ArrayView2<f64>, tol: f64) -> bool {
        self.column_loads(gamma)
            .iter()
            .zip(&self.lambda)
            .all(|(s, l)| s.abs() <= l + tol)
    }
}

/// `Σ_i c_i v_i exp(−v_i x)` and its derivative.
fn band_load(mass: &[f64], v: &[f64], x: f64) -> (f64, f64) {
    let mut f = 0.0;
    let mut df = 0.0;
    for (&c, &vi) in mass.iter().zip(v) {
        if c > 0.0 {
            let t = c * vi * (-vi * x).exp();
            f += t;
            df -= t * vi;
        }
    }
    (f, df)
}

/// Finds `ν` with `Σ_i mass_i V_i exp(−V_i ν) = target`.
///
/// The left side is non-increasing in `ν`. The search starts at zero,
/// doubles a bracket until the sign changes (capped at
/// `|ν| = 700 / max|V_i|`), then runs Newton steps that fall back to
/// bisection whenever a step leaves the bracket.
pub fn solve_nu(mass: &[f64], v: &[f64], target: f64) -> Result<f64> {
    check_len(mass.len(), v.len())?;
    let scale: f64 = mass.iter().zip(v).map(|(c, vi)| c * vi.abs()).sum();
    let tol = NU_TOLERANCE * target.abs().max(1.0) * scale.min(1.0);
    let residual = |x: f64| {
        let (f, df) = band_load(mass, v, x);
        (f - target, df)
    };

    let (r0, _) = residual(0.0);
    if r0.abs() <= tol {
        return Ok(0.0);
    }
    let vmax = v
        .iter()
        .zip(mass)
        .filter(|(_, &c)| c > 0.0)
        .fold(0.0f64, |m, (vi, _)| m.max(vi.abs()));
    if vmax == 0.0 {
        return Err(Error::RootNotBracketed {
            column: None,
            limit: 0.0,
        });
    }
    let limit = EXP_LIMIT / vmax;

    // residual is decreasing: positive residual means the root lies to the right
    let dir = if r0 > 0.0 { 1.0 } else { -1.0 };
    let mut near = 0.0; // residual has the sign of r0 here
    let mut far = dir * (1.0f64).min(limit);
    loop {
        // an asymptote can come within `tol` without crossing, so only a
        // genuine sign change counts here
        let (r, _) = residual(far);
        if r == 0.0 {
            return Ok(far);
        }
        if r.signum() != r0.signum() {
            break;
        }
        if far.abs() >= limit {
            return Err(Error::RootNotBracketed {
                column: None,
                limit,
            });
        }
        near = far;
        far = dir * (2.0 * far.abs()).min(limit);
    }

    let (mut lo, mut hi) = if near < far { (near, far) } else { (far, near) };
    let mut x = near;
    for _ in 0..200 {
        let (r, dr) = residual(x);
        if r.abs() <= tol {
            return Ok(x);
        }
        // residual decreasing: r > 0 means x is left of the root
        if r > 0.0 {
            lo = lo.max(x);
        } else {
            hi = hi.min(x);
        }
        let newton = x - r / dr;
        x = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * x.abs().max(1e-300) {
            return Ok(x);
        }
    }
    Ok(x)
}

/// Projection onto the band `−Λ ≤ γ'V ≤ Λ`.
///
/// Columns already inside the band and rows outside the active set of `V`
/// are copied unchanged. Every other column `j` has its active entries
/// multiplied by `exp(−V_i ν_j)`, which moves `[γ'V]_j` onto the nearer
/// band edge.
pub fn prox_band(gamma: ArrayView2<f64>, band: &BandConstraint) -> Result<Array2<f64>> {
    let mut out = gamma.to_owned();
    prox_band_in_place(&mut out, band)?;
    Ok(out)
}

pub(crate) fn prox_band_in_place(gamma: &mut Array2<f64>, band: &BandConstraint) -> Result<()> {
    let n = band.v.len();
    check_len(n, gamma.nrows())?;
    check_len(n, gamma.ncols())?;
    let active = band.v.active();
    let v: Vec<f64> = active.iter().map(|&i| band.v.values()[i]).collect();
    let loads = band.column_loads(gamma.view());
    let mut mass = vec![0.0; active.len()];
    for (j, load) in loads.into_iter().enumerate() {
        let width = band.lambda[j];
        if load.abs() <= width {
            continue;
        }
        let target = if load > width { width } else { -width };
        for (m, &i) in mass.iter_mut().zip(active) {
            *m = gamma[(i, j)];
        }
        let nu = solve_nu(&mass, &v, target).map_err(|e| match e {
            Error::RootNotBracketed { limit, .. } => Error::RootNotBracketed {
                column: Some(j),
                limit,
            },
            other => other,
        })?;
        for (&i, &vi) in active.iter().zip(&v) {
            gamma[(i, j)] *= (-vi * nu).exp();
        }
    }
    Ok(())
}

/// A transport plan between two supports.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    entries: Array2<f64>,
    source: Arc<Support>,
    target: Arc<Support>,
}

impl Coupling {
    pub fn new(entries: Array2<f64>, source: Arc<Support>, target: Arc<Support>) -> Result<Self> {
        if entries.dim() != (source.len(), target.len()) {
            return Err(Error::DimensionMismatch {
                expected: source.len() * target.len(),
                actual: entries.len(),
            });
        }
        if let Some(((i, j), v)) = entries.indexed_iter().find(|(_, v)| !(**v >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "coupling entry ({i}, {j}) is {v}, must be nonnegative"
            )));
        }
        Ok(Coupling {
            entries,
            source,
            target,
        })
    }

    /// `P ⊗ Q`, always a member of the transport polytope.
    pub fn outer_product(p: &crate::SimplexVector, q: &crate::SimplexVector) -> Self {
        let entries =
            Array2::from_shape_fn((p.len(), q.len()), |(i, j)| p.values()[i] * q.values()[j]);
        Coupling {
            entries,
            source: p.support().clone(),
            target: q.support().clone(),
        }
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn into_entries(self) -> Array2<f64> {
        self.entries
    }

    pub fn source(&self) -> &Arc<Support> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Support> {
        &self.target
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.entries.sum_axis(Axis(1)).to_vec()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        self.entries.sum_axis(Axis(0)).to_vec()
    }

    pub fn total_mass(&self) -> f64 {
        self.entries.sum()
    }

    /// `γ'x` for a vector indexed by source points.
    pub fn transpose_apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.entries.ncols())
            .map(|j| {
                self.entries
                    .column(j)
                    .iter()
                    .zip(x)
                    .map(|(g, xi)| g * xi)
                    .sum()
            })
            .collect()
    }

    /// Transport cost `⟨C, γ⟩`.
    pub fn cost(&self, cost: &CostMatrix) -> f64 {
        (&self.entries * &cost.entries).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Support;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn grid(n: i64) -> Support {
        Support::integer_range(0, n - 1).unwrap()
    }

    #[test]
    fn unit_grid_cost() {
        let s = grid(3);
        let c = cost_matrix(&s, &s, &[1.0]).unwrap();
        assert_eq!(
            c.entries(),
            &array![[0.0, 1.0, 2.0], [1.0, 0.0, 1.0], [2.0, 1.0, 0.0]]
        );
    }

    #[test]
    fn weighted_tuple_cost() {
        use crate::distributions::Point;
        let s = Support::new(vec![Point::new(vec![1.0, 1.0]), Point::new(vec![2.0, 4.0])]).unwrap();
        let c = cost_matrix(&s, &s, &[1.0, 0.25]).unwrap();
        assert_abs_diff_eq!(c.entries()[(0, 1)], 1.75, epsilon = 1e-15);
        assert_eq!(c.entries()[(0, 0)], 0.0);
    }

    #[test]
    fn cost_rejects_bad_weights() {
        let s = grid(2);
        assert!(matches!(
            cost_matrix(&s, &s, &[0.0]),
            Err(Error::NonPositiveWeight { .. })
        ));
        assert!(matches!(
            cost_matrix(&s, &s, &[1.0, 1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn kernel_cases() {
        let zero = CostMatrix::from_entries(Array2::zeros((2, 2))).unwrap();
        assert_eq!(
            gibbs_kernel(&zero, 0.3).unwrap(),
            Array2::<f64>::ones((2, 2))
        );

        let s = grid(3);
        let c = cost_matrix(&s, &s, &[1.0]).unwrap();
        let k = gibbs_kernel(&c, 1.0).unwrap();
        let e1 = (-1.0f64).exp();
        let e2 = (-2.0f64).exp();
        let expected = array![[1.0, e1, e2], [e1, 1.0, e1], [e2, e1, 1.0]];
        for (a, b) in k.iter().zip(expected.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
        assert!(matches!(
            gibbs_kernel(&c, 0.0),
            Err(Error::NonPositiveEpsilon(_))
        ));
        assert!(matches!(
            gibbs_kernel(&c, -1.0),
            Err(Error::NonPositiveEpsilon(_))
        ));
    }

    #[test]
    fn kernel_floor_on_synthetic_grid() {
        let s = Support::integer_range(-30, 10).unwrap();
        let c = cost_matrix(&s, &s, &[1.0]).unwrap();
        let k = gibbs_kernel(&c, 0.01).unwrap();
        assert!(k.iter().all(|&x| x >= KERNEL_FLOOR));
        for d in 1..=6usize {
            assert_eq!(k[(0, d)], (-100.0 * d as f64).exp());
        }
        // exp(-700) is below the floor
        for d in 7..=40usize {
            assert_eq!(k[(0, d)], KERNEL_FLOOR);
        }
    }

    #[test]
    fn entropy_cases() {
        assert_eq!(entropy(Array2::<f64>::zeros((2, 2)).view()), 0.0);
        assert_eq!(entropy(array![[1.0]].view()), 1.0);
        let u = Array2::from_elem((2, 2), 0.25);
        assert_abs_diff_eq!(entropy(u.view()), 4.0f64.ln() + 1.0, epsilon = 1e-14);
    }

    #[test]
    fn kl_cases() {
        let xi = array![[0.2, 0.3], [0.1, 0.4]];
        assert_abs_diff_eq!(
            kl_divergence(xi.view(), xi.view()).unwrap(),
            -1.0,
            epsilon = 1e-15
        );
        assert_eq!(
            kl_divergence(Array2::zeros((2, 2)).view(), xi.view()).unwrap(),
            0.0
        );
        let u = Array2::from_elem((2, 2), 0.25);
        assert_abs_diff_eq!(
            kl_divergence(u.view(), Array2::ones((2, 2)).view()).unwrap(),
            0.25f64.ln() - 1.0,
            epsilon = 1e-14
        );
        let bad = array![[1.0, 0.0], [1.0, 1.0]];
        assert!(matches!(
            kl_divergence(u.view(), bad.view()),
            Err(Error::NonPositiveReference { row: 0, col: 1, .. })
        ));
    }

    #[test]
    fn prox_rows_cases() {
        let g = array![[0.1, 0.2], [0.3, 0.4]];
        let p = [0.3, 0.7];
        let out = prox_rows(g.view(), &p).unwrap();
        assert!(out
            .iter()
            .zip(g.iter())
            .all(|(a, b)| (a - b).abs() <= 1e-15));

        let ones = Array2::ones((2, 2));
        assert_eq!(
            prox_rows(ones.view(), &[0.5, 0.5]).unwrap(),
            Array2::from_elem((2, 2), 0.25)
        );

        let g = array![[1.0, 3.0], [2.0, 2.0]];
        let out = prox_rows(g.view(), &[0.6, 0.4]).unwrap();
        let expected = array![[0.15, 0.45], [0.2, 0.2]];
        for (a, b) in out.iter().zip(expected.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }

        let z = array![[0.0, 0.0], [1.0, 1.0]];
        assert!(matches!(
            prox_rows(z.view(), &[0.5, 0.5]),
            Err(Error::ZeroRowWithMass { row: 0, .. })
        ));
        let out = prox_rows(g.view(), &[1.0, 0.0]).unwrap();
        assert_eq!(out.row(1).to_vec(), vec![0.0, 0.0]);
    }

    #[test]
    fn prox_cols_cases() {
        let g = array![[0.1, 0.2], [0.3, 0.4]];
        let out = prox_cols(g.view(), &[0.4, 0.6]).unwrap();
        assert!(out
            .iter()
            .zip(g.iter())
            .all(|(a, b)| (a - b).abs() <= 1e-15));
        let ones = Array2::ones((2, 2));
        assert_eq!(
            prox_cols(ones.view(), &[0.5, 0.5]).unwrap(),
            Array2::from_elem((2, 2), 0.25)
        );
    }

    #[test]
    fn inequality_and_mass_proxes() {
        let g = array![[0.1, 0.1], [0.2, 0.1]];
        assert_eq!(prox_rows_leq(g.view(), &[0.5, 0.5]).unwrap(), g);
        assert_eq!(prox_cols_leq(g.view(), &[0.5, 0.5]).unwrap(), g);
        let clipped = prox_rows_leq(g.view(), &[0.1, 0.5]).unwrap();
        assert_abs_diff_eq!(clipped.row(0).sum(), 0.1, epsilon = 1e-15);
        assert_eq!(clipped.row(1), g.row(1));

        let two = array![[0.5, 0.5], [0.5, 0.5]];
        assert_eq!(
            prox_total_mass(two.view(), 1.0).unwrap(),
            two.mapv(|x| x / 2.0)
        );
        assert!(matches!(
            prox_total_mass(Array2::zeros((2, 2)).view(), 1.0),
            Err(Error::ZeroTotalMass(_))
        ));

        let cap = prox_capacity(array![[0.5]].view(), array![[0.2]].view()).unwrap();
        assert_eq!(cap, array![[0.2]]);
    }

    #[test]
    fn solve_nu_single_term() {
        let nu = solve_nu(&[1.0], &[1.0], (-1.0f64).exp()).unwrap();
        assert_abs_diff_eq!(nu, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn solve_nu_noop_root() {
        assert_eq!(
            solve_nu(&[0.25, 0.25], &[-2.0 / 3.0, 2.0 / 3.0], 0.0).unwrap(),
            0.0
        );
    }

    /// Plain bisection to 1e-14, independent of the Newton path.
    fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        assert!(f(lo) > 0.0 && f(hi) < 0.0);
        while hi - lo > 1e-14 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn solve_nu_two_point_against_bisection() {
        let v = [-2.0 / 3.0, 2.0 / 3.0];
        let target = 1.0 / 12.0;
        let f = |x: f64| 0.25 * v[0] * (-v[0] * x).exp() + 0.25 * v[1] * (-v[1] * x).exp() - target;
        let oracle = bisect(f, -10.0, 10.0);
        let nu = solve_nu(&[0.25, 0.25], &v, target).unwrap();
        assert_abs_diff_eq!(nu, oracle, epsilon = 1e-9);
        // closed form: -(1/3) sinh(2x/3) = 1/12  =>  x = -(3/2) asinh(1/4)
        assert_abs_diff_eq!(nu, -1.5 * 0.25f64.asinh(), epsilon = 1e-9);
    }

    #[test]
    fn solve_nu_one_signed_zero_target_fails() {
        let r = solve_nu(&[0.5, 0.5], &[1.0, 2.0], 0.0);
        assert!(matches!(r, Err(Error::RootNotBracketed { .. })));
    }

    fn observation_band(lambda: f64) -> BandConstraint {
        let s = Arc::new(grid(2));
        let v = RepairVector::new(vec![-2.0 / 3.0, 2.0 / 3.0], s).unwrap();
        BandConstraint::uniform(v, lambda).unwrap()
    }

    #[test]
    fn band_keeps_feasible_input() {
        let band = observation_band(0.0);
        let g = Array2::from_elem((2, 2), 0.25);
        assert_eq!(prox_band(g.view(), &band).unwrap(), g);
    }

    #[test]
    fn band_corrects_violated_column() {
        let band = observation_band(0.0);
        let g = array![[0.5, 0.0], [0.0, 0.5]];
        // both columns one-signed under V, no root
        assert!(matches!(
            prox_band(g.view(), &band),
            Err(Error::RootNotBracketed {
                column: Some(0),
                ..
            })
        ));
        let g = array![[0.4, 0.1], [0.1, 0.4]];
        let out = prox_band(g.view(), &band).unwrap();
        for load in band.column_loads(out.view()) {
            assert!(load.abs() <= 1e-10);
        }
    }

    #[test]
    fn band_leaves_inactive_rows() {
        let s = Arc::new(grid(3));
        let v = RepairVector::new(vec![-1.0, 0.0, 2.0], s).unwrap();
        let band = BandConstraint::uniform(v, 0.01).unwrap();
        let g = array![[0.1, 0.2, 0.05], [0.3, 0.1, 0.1], [0.2, 0.01, 0.3]];
        let out = prox_band(g.view(), &band).unwrap();
        assert_eq!(out.row(1), g.row(1));
        for (load, l) in band.column_loads(out.view()).iter().zip(band.lambda()) {
            assert!(load.abs() <= l + 1e-10);
        }
    }
}
