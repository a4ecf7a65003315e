//! Discrete supports, probability vectors on them, empirical estimation,
//! total-variation distance and the repair vector.

use std::borrow::Borrow;
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Entries with magnitude below this are excluded from the active set of a
/// [`RepairVector`].
pub const ACTIVE_THRESHOLD: f64 = 1e-12;

/// Tolerated drift of a probability vector's sum before it is rejected.
pub const SIMPLEX_RENORMALIZE_TOL: f64 = 1e-6;

/// Most negative entry accepted (and clamped to zero) by [`make_simplex`].
pub const NEGATIVE_DUST: f64 = -1e-12;

/// A feature tuple. Scalars are one-element tuples.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        // -0.0 and 0.0 must land on the same support point
        Point(
            coords
                .into_iter()
                .map(|c| if c == 0.0 { 0.0 } else { c })
                .collect(),
        )
    }

    pub fn scalar(x: f64) -> Self {
        Point::new(vec![x])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl Eq for Point {}

impl PartialOrd for Point {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Point {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            return write!(f, "{}", self.0[0]);
        }
        write!(f, "(")?;
        for (k, c) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ";")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl From<f64> for Point {
    fn from(x: f64) -> Self {
        Point::scalar(x)
    }
}

/// Ordered, duplicate-free set of discretisation points of equal dimension.
///
/// Points are sorted lexicographically; a point's index is its rank in
/// that order.
#[derive(Debug, Clone, PartialEq)]
pub struct Support {
    points: Vec<Point>,
}

impl Support {
    /// Builds a support from distinct points. Duplicates are an error.
    pub fn new(mut points: Vec<Point>) -> Result<Self> {
        Self::validate_points(&points)?;
        points.sort();
        if let Some(w) = points.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidSupport(format!("duplicate point {}", w[0])));
        }
        Ok(Support { points })
    }

    /// Builds a support from observed values, deduplicating.
    pub fn from_observed<I>(points: I) -> Result<Self>
    where
        I: IntoIterator<Item = Point>,
    {
        let mut points: Vec<Point> = points.into_iter().collect();
        Self::validate_points(&points)?;
        points.sort();
        points.dedup();
        Ok(Support { points })
    }

    pub fn scalar<I: IntoIterator<Item = f64>>(values: I) -> Result<Self> {
        Self::new(values.into_iter().map(Point::scalar).collect())
    }

    /// The integer grid `lo, lo+1, ..., hi`.
    pub fn integer_range(lo: i64, hi: i64) -> Result<Self> {
        if hi < lo {
            return Err(Error::InvalidSupport(format!("empty range {lo}..={hi}")));
        }
        Self::scalar((lo..=hi).map(|v| v as f64))
    }

    fn validate_points(points: &[Point]) -> Result<()> {
        let first = points
            .first()
            .ok_or_else(|| Error::InvalidSupport("support needs at least one point".into()))?;
        let dim = first.dim();
        if dim == 0 {
            return Err(Error::InvalidSupport(
                "points need at least one coordinate".into(),
            ));
        }
        for p in points {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: p.dim(),
                });
            }
            if p.coords().iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidSupport(format!(
                    "non-finite coordinate in {p}"
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, index: usize) -> &Point {
        &self.points[index]
    }

    pub fn index_of(&self, point: &Point) -> Option<usize> {
        self.points.binary_search(point).ok()
    }

    /// Spacing of a scalar, evenly spaced grid, or `None` if the support is
    /// not one.
    pub fn uniform_spacing(&self) -> Option<f64> {
        if self.dim() != 1 {
            return None;
        }
        if self.len() == 1 {
            return Some(1.0);
        }
        let step = self.points[1].coords()[0] - self.points[0].coords()[0];
        let tol = 1e-9 * step.abs().max(1.0);
        let even = self
            .points
            .windows(2)
            .all(|w| ((w[1].coords()[0] - w[0].coords()[0]) - step).abs() <= tol);
        even.then_some(step)
    }
}

pub(crate) fn same_support(a: &Arc<Support>, b: &Arc<Support>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// A probability vector on a [`Support`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexVector {
    values: Vec<f64>,
    support: Arc<Support>,
}

impl SimplexVector {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn support(&self) -> &Arc<Support> {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Point mass at `index`.
    pub fn dirac(index: usize, support: Arc<Support>) -> Result<Self> {
        if index >= support.len() {
            return Err(Error::InvalidArgument(format!(
                "dirac index {index} outside support of size {}",
                support.len()
            )));
        }
        let mut values = vec![0.0; support.len()];
        values[index] = 1.0;
        Ok(SimplexVector { values, support })
    }

    pub fn uniform(support: Arc<Support>) -> Self {
        let n = support.len();
        SimplexVector {
            values: vec![1.0 / n as f64; n],
            support,
        }
    }
}

impl AsRef<[f64]> for SimplexVector {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

/// Validates and lightly repairs a candidate probability vector.
///
/// Negative entries down to `-1e-12` are clamped to zero and a sum within
/// `1e-6` of one is renormalised; anything else is rejected.
pub fn make_simplex(mut values: Vec<f64>, support: Arc<Support>) -> Result<SimplexVector> {
    if values.len() != support.len() {
        return Err(Error::LengthMismatch {
            expected: support.len(),
            actual: values.len(),
        });
    }
    for (i, v) in values.iter_mut().enumerate() {
        if !v.is_finite() || *v < NEGATIVE_DUST {
            return Err(Error::NotAProbabilityVector {
                reason: format!("entry {i} is {v}"),
            });
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_RENORMALIZE_TOL {
        return Err(Error::NotAProbabilityVector {
            reason: format!("entries sum to {sum}"),
        });
    }
    if sum != 1.0 {
        values.iter_mut().for_each(|v| *v /= sum);
    }
    Ok(SimplexVector { values, support })
}

fn check_weight(w: f64) -> Result<()> {
    if !w.is_finite() || w < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "sample weights must be finite and nonnegative, got {w}"
        )));
    }
    Ok(())
}

fn normalize(mass: Vec<f64>, support: Arc<Support>) -> Result<SimplexVector> {
    let total: f64 = mass.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroTotalWeight);
    }
    let values = mass.into_iter().map(|m| m / total).collect();
    Ok(SimplexVector { values, support })
}

/// Weighted empirical distribution of samples given by support index.
pub fn empirical_from_indices<I>(samples: I, support: Arc<Support>) -> Result<SimplexVector>
where
    I: IntoIterator<Item = (usize, f64)>,
{
    let mut mass = vec![0.0; support.len()];
    for (i, w) in samples {
        check_weight(w)?;
        let slot = mass
            .get_mut(i)
            .ok_or_else(|| Error::PointOffSupport(format!("index {i}")))?;
        *slot += w;
    }
    normalize(mass, support)
}

/// Weighted empirical distribution of `(point, weight)` samples.
pub fn empirical_distribution<I, P>(samples: I, support: Arc<Support>) -> Result<SimplexVector>
where
    I: IntoIterator<Item = (P, f64)>,
    P: Borrow<Point>,
{
    let mut mass = vec![0.0; support.len()];
    for (p, w) in samples {
        check_weight(w)?;
        let p = p.borrow();
        let i = support
            .index_of(p)
            .ok_or_else(|| Error::PointOffSupport(p.to_string()))?;
        mass[i] += w;
    }
    normalize(mass, support)
}

/// Per-group conditional distributions, each normalised within its group.
pub fn groupwise_empirical<I, P, G>(
    samples: I,
    support: Arc<Support>,
) -> Result<BTreeMap<G, SimplexVector>>
where
    I: IntoIterator<Item = (P, f64, G)>,
    P: Borrow<Point>,
    G: Ord + fmt::Display,
{
    let mut mass: BTreeMap<G, Vec<f64>> = BTreeMap::new();
    for (p, w, g) in samples {
        check_weight(w)?;
        let p = p.borrow();
        let i = support
            .index_of(p)
            .ok_or_else(|| Error::PointOffSupport(p.to_string()))?;
        mass.entry(g).or_insert_with(|| vec![0.0; support.len()])[i] += w;
    }
    mass.into_iter()
        .map(|(g, m)| match normalize(m, support.clone()) {
            Ok(dist) => Ok((g, dist)),
            Err(Error::ZeroTotalWeight) => Err(Error::EmptyGroup(g.to_string())),
            Err(e) => Err(e),
        })
        .collect()
}

/// Total-variation distance `½ Σ |P_j − Q_j|`.
pub fn tv_distance(p: &SimplexVector, q: &SimplexVector) -> Result<f64> {
    if !same_support(&p.support, &q.support) {
        return Err(Error::SupportMismatch);
    }
    Ok(tv_slices(&p.values, &q.values))
}

pub(crate) fn tv_slices(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// `V = (P^{X_{s0}} − P^{X_{s1}}) / P^X` together with its nonzero index set.
#[derive(Debug, Clone, PartialEq)]
pub struct RepairVector {
    values: Vec<f64>,
    active: Vec<usize>,
    support: Arc<Support>,
}

impl RepairVector {
    /// Wraps externally supplied repair-vector values.
    ///
    /// Values must be finite and, unless all zero, of mixed sign.
    pub fn new(values: Vec<f64>, support: Arc<Support>) -> Result<Self> {
        if values.len() != support.len() {
            return Err(Error::LengthMismatch {
                expected: support.len(),
                actual: values.len(),
            });
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "repair vector entry {i} is {v}"
            )));
        }
        let active: Vec<usize> = values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.abs() >= ACTIVE_THRESHOLD)
            .map(|(i, _)| i)
            .collect();
        if !active.is_empty() {
            let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if !(min < 0.0 && max > 0.0) {
                return Err(Error::InvalidArgument(
                    "repair vector entries must not be all of one sign".into(),
                ));
            }
        }
        Ok(RepairVector {
            values,
            active,
            support,
        })
    }

    pub fn zeros(support: Arc<Support>) -> Self {
        RepairVector {
            values: vec![0.0; support.len()],
            active: Vec::new(),
            support,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Indices with `|V_i| >= 1e-12`.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.active.binary_search(&i).is_ok()
    }

    pub fn support(&self) -> &Arc<Support> {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Computes the repair vector from the pooled and the two group-conditional
/// source distributions.
pub fn repair_vector(
    px: &SimplexVector,
    px_s0: &SimplexVector,
    px_s1: &SimplexVector,
) -> Result<RepairVector> {
    if !same_support(&px.support, &px_s0.support) || !same_support(&px.support, &px_s1.support) {
        return Err(Error::SupportMismatch);
    }
    let mut values = Vec::with_capacity(px.len());
    for i in 0..px.len() {
        let (p, a, b) = (px.values[i], px_s0.values[i], px_s1.values[i]);
        if p > 0.0 {
            values.push((a - b) / p);
        } else if a > 0.0 || b > 0.0 {
            return Err(Error::DivisionBySupportHole { index: i });
        } else {
            values.push(0.0);
        }
    }
    RepairVector::new(values, px.support.clone())
}


#[cfg(test)]
mod properties {
    use super::*;
    use proptest::prelude::*;

    fn simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1.0, n).prop_filter_map("zero mass", |raw| {
            let s: f64 = raw.iter().sum();
            (s > 1e-3).then(|| raw.iter().map(|v| v / s).collect())
        })
    }

    fn strictly_positive_simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.01f64..1.0, n).prop_map(|raw| {
            let s: f64 = raw.iter().sum();
            raw.iter().map(|v| v / s).collect()
        })
    }

    proptest! {
        #[test]
        fn tv_is_a_metric((a, b, c) in (2usize..8).prop_flat_map(|n| (simplex(n), simplex(n), simplex(n)))) {
            let s = Arc::new(Support::integer_range(0, a.len() as i64 - 1).unwrap());
            let p = make_simplex(a, s.clone()).unwrap();
            let q = make_simplex(b, s.clone()).unwrap();
            let r = make_simplex(c, s).unwrap();
            let pq = tv_distance(&p, &q).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&pq));
            prop_assert_eq!(pq, tv_distance(&q, &p).unwrap());
            prop_assert_eq!(tv_distance(&p, &p).unwrap(), 0.0);
            prop_assert!(pq <= tv_distance(&p, &r).unwrap() + tv_distance(&r, &q).unwrap() + 1e-12);
        }

        #[test]
        fn repair_vector_properties(
            (w0, w1, mix) in (2usize..10).prop_flat_map(|n| (strictly_positive_simplex(n), strictly_positive_simplex(n), 0.05f64..0.95))
        ) {
            let s = Arc::new(Support::integer_range(0, w0.len() as i64 - 1).unwrap());
            let pooled: Vec<f64> = w0.iter().zip(&w1).map(|(a, b)| mix * a + (1.0 - mix) * b).collect();
            let px = make_simplex(pooled, s.clone()).unwrap();
            let s0 = make_simplex(w0, s.clone()).unwrap();
            let s1 = make_simplex(w1, s).unwrap();
            let v = repair_vector(&px, &s0, &s1).unwrap();
            let inner: f64 = px.values().iter().zip(v.values()).map(|(p, v)| p * v).sum();
            prop_assert!(inner.abs() <= 1e-9);
            if !v.active().is_empty() {
                prop_assert!(v.values().iter().any(|&x| x < 0.0));
                prop_assert!(v.values().iter().any(|&x| x > 0.0));
            }
            let l1: f64 = v.values().iter().map(|x| x.abs()).sum();
            let inv_l1: f64 = px.values().iter().map(|p| 1.0 / p).sum();
            prop_assert!(l1 <= 2.0 * inv_l1);
        }
    }
}
