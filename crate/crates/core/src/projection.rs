//! The group-blind projection map and its application to weighted datasets.
//!
//! A coupling `γ` with row marginal `P^X` defines `w_{i,j} = γ_{i,j}/P^X_i`:
//! a sample at source point `i` is split into pieces at target points `j`
//! carrying weight `w_{i,j}`. Only the feature value is consulted; neutral
//! features, labels, scores and group tags ride along untouched.

use std::sync::Arc;

use ndarray::Array2;

use crate::distributions::{empirical_from_indices, same_support, Point, SimplexVector, Support};
use crate::error::{Error, Result};
use crate::transport::Coupling;

/// Row-sum tolerance between a coupling and the marginal it is built from.
pub const MARGINAL_TOLERANCE: f64 = 1e-6;
/// Split weights below this are dropped and the row renormalised.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

/// Group tag of the unprivileged group `s₀`.
pub const GROUP_0: u8 = 0;
/// Group tag of the privileged group `s₁`.
pub const GROUP_1: u8 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMap {
    weights: Array2<f64>,
    reachable: Vec<bool>,
    source: Arc<Support>,
    target: Arc<Support>,
}

impl ProjectionMap {
    /// Every point maps to itself.
    pub fn identity(support: Arc<Support>) -> Self {
        let n = support.len();
        ProjectionMap {
            weights: Array2::eye(n),
            reachable: vec![true; n],
            source: support.clone(),
            target: support,
        }
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn is_reachable(&self, i: usize) -> bool {
        self.reachable.get(i).copied().unwrap_or(false)
    }

    pub fn source(&self) -> &Arc<Support> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Support> {
        &self.target
    }

    /// `𝒯(i)`: target indices with their split weights, ascending by index,
    /// pruned below [`PRUNE_THRESHOLD`] and renormalised to sum to one.
    pub fn pieces(&self, i: usize) -> Result<Vec<(usize, f64)>> {
        if !self.is_reachable(i) {
            return Err(Error::UnreachableSourcePoint(i));
        }
        let row = self.weights.row(i);
        let kept: Vec<(usize, f64)> = row
            .iter()
            .enumerate()
            .filter(|(_, &w)| w >= PRUNE_THRESHOLD)
            .map(|(j, &w)| (j, w))
            .collect();
        let total: f64 = kept.iter().map(|(_, w)| w).sum();
        if total <= 0.0 {
            return Err(Error::UnreachableSourcePoint(i));
        }
        Ok(kept.into_iter().map(|(j, w)| (j, w / total)).collect())
    }

    /// `Σ_i p_i w_{i,·}`: where the map sends a distribution on the source.
    pub fn push_forward(&self, p: &[f64]) -> Result<Vec<f64>> {
        if p.len() != self.source.len() {
            return Err(Error::LengthMismatch {
                expected: self.source.len(),
                actual: p.len(),
            });
        }
        let mut out = vec![0.0; self.target.len()];
        for (i, &pi) in p.iter().enumerate() {
            if pi == 0.0 {
                continue;
            }
            for (j, w) in self.pieces(i)? {
                out[j] += pi * w;
            }
        }
        Ok(out)
    }
}

/// `w_{i,j} = γ_{i,j}/pX_i`; rows with `pX_i = 0` are left empty and marked
/// unreachable.
pub fn build_map(gamma: &Coupling, px: &SimplexVector) -> Result<ProjectionMap> {
    if !same_support(gamma.source(), px.support()) {
        return Err(Error::SupportMismatch);
    }
    let entries = gamma.entries();
    let (n, m) = entries.dim();
    let mut weights = Array2::zeros((n, m));
    let mut reachable = vec![false; n];
    for (i, (&p, row)) in px.values().iter().zip(entries.rows()).enumerate() {
        let sum = row.sum();
        if (sum - p).abs() > MARGINAL_TOLERANCE {
            return Err(Error::MarginalMismatch {
                row: i,
                expected: p,
                actual: sum,
            });
        }
        if p > 0.0 && sum > 0.0 {
            weights.row_mut(i).assign(&row.mapv(|g| g / p));
            reachable[i] = true;
        }
    }
    Ok(ProjectionMap {
        weights,
        reachable,
        source: gamma.source().clone(),
        target: gamma.target().clone(),
    })
}

/// Map from an arbitrary transport plan, each row normalised by its own
/// mass; rows without mass are unreachable.
pub fn plan_map(
    plan: &Array2<f64>,
    source: Arc<Support>,
    target: Arc<Support>,
) -> Result<ProjectionMap> {
    if plan.dim() != (source.len(), target.len()) {
        return Err(Error::DimensionMismatch {
            expected: source.len() * target.len(),
            actual: plan.len(),
        });
    }
    let mut weights = Array2::zeros(plan.dim());
    let mut reachable = vec![false; source.len()];
    for (i, row) in plan.rows().into_iter().enumerate() {
        let sum = row.sum();
        if sum > 0.0 {
            weights.row_mut(i).assign(&row.mapv(|g| g / sum));
            reachable[i] = true;
        }
    }
    Ok(ProjectionMap {
        weights,
        reachable,
        source,
        target,
    })
}

/// One (possibly split) sample.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedRow {
    /// Index of the adjusted-feature value on the dataset's support.
    pub x: usize,
    /// Neutral features, carried verbatim.
    pub u: Vec<String>,
    pub s: Option<u8>,
    pub y: Option<u8>,
    pub score: Option<f64>,
    pub w: f64,
    /// Row id of the original sample this piece came from.
    pub origin: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDataset {
    support: Arc<Support>,
    neutral_columns: Vec<String>,
    rows: Vec<WeightedRow>,
}

impl WeightedDataset {
    pub fn new(
        support: Arc<Support>,
        neutral_columns: Vec<String>,
        rows: Vec<WeightedRow>,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut total = 0.0;
        for r in &rows {
            if r.x >= support.len() {
                return Err(Error::PointOffSupport(format!("index {}", r.x)));
            }
            if !r.w.is_finite() || r.w < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "row {} has weight {}",
                    r.origin, r.w
                )));
            }
            if r.u.len() != neutral_columns.len() {
                return Err(Error::LengthMismatch {
                    expected: neutral_columns.len(),
                    actual: r.u.len(),
                });
            }
            total += r.w;
        }
        if total <= 0.0 {
            return Err(Error::ZeroTotalWeight);
        }
        Ok(WeightedDataset {
            support,
            neutral_columns,
            rows,
        })
    }

    pub fn support(&self) -> &Arc<Support> {
        &self.support
    }

    pub fn neutral_columns(&self) -> &[String] {
        &self.neutral_columns
    }

    pub fn rows(&self) -> &[WeightedRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn point(&self, row: &WeightedRow) -> &Point {
        self.support.point(row.x)
    }

    pub fn total_weight(&self) -> f64 {
        self.rows.iter().map(|r| r.w).sum()
    }

    pub fn group_weight(&self, g: u8) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.s == Some(g))
            .map(|r| r.w)
            .sum()
    }

    /// Number of distinct original samples.
    pub fn origin_count(&self) -> usize {
        let mut ids: Vec<usize> = self.rows.iter().map(|r| r.origin).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }

    /// Pooled weighted empirical distribution of `x`.
    pub fn distribution(&self) -> Result<SimplexVector> {
        empirical_from_indices(self.rows.iter().map(|r| (r.x, r.w)), self.support.clone())
    }

    /// Weighted empirical distribution of `x` within group `g`.
    pub fn group_distribution(&self, g: u8) -> Result<SimplexVector> {
        let it = self
            .rows
            .iter()
            .filter(|r| r.s == Some(g))
            .map(|r| (r.x, r.w));
        empirical_from_indices(it, self.support.clone()).map_err(|e| match e {
            Error::ZeroTotalWeight => Error::EmptyGroup(g.to_string()),
            e => e,
        })
    }

    /// Weight share of each group among tagged rows.
    pub fn group_shares(&self) -> Result<[f64; 2]> {
        let a = self.group_weight(GROUP_0);
        let b = self.group_weight(GROUP_1);
        if a + b <= 0.0 {
            return Err(Error::EmptyGroup("any".into()));
        }
        Ok([a / (a + b), b / (a + b)])
    }

    /// Copy with every group tag erased.
    pub fn without_groups(&self) -> Self {
        let mut out = self.clone();
        out.rows.iter_mut().for_each(|r| r.s = None);
        out
    }

    /// Rows restricted to `keep(origin)`.
    pub fn filter_origins(&self, keep: impl Fn(usize) -> bool) -> Result<Self> {
        let rows = self
            .rows
            .iter()
            .filter(|r| keep(r.origin))
            .cloned()
            .collect();
        WeightedDataset::new(self.support.clone(), self.neutral_columns.clone(), rows)
    }
}

fn split_rows(out: &mut Vec<WeightedRow>, row: &WeightedRow, map: &ProjectionMap) -> Result<()> {
    for (j, wj) in map.pieces(row.x)? {
        out.push(WeightedRow {
            x: j,
            w: row.w * wj,
            ..row.clone()
        });
    }
    Ok(())
}

/// Replaces each row `(i, u, s, y, w)` by `{(j, u, s, y, w·w_{i,j})}`.
///
/// Output order is input order, with the pieces of one row in ascending
/// target index.
pub fn apply_map(map: &ProjectionMap, data: &WeightedDataset) -> Result<WeightedDataset> {
    if !same_support(map.source(), data.support()) {
        return Err(Error::SupportMismatch);
    }
    let mut rows = Vec::with_capacity(data.len());
    for row in data.rows() {
        split_rows(&mut rows, row, map)?;
    }
    WeightedDataset::new(map.target().clone(), data.neutral_columns.clone(), rows)
}

/// Group-aware variant: rows of group `g` go through `maps[g]`. Used only by
/// the barycentre baseline.
pub fn apply_group_maps(
    maps: [&ProjectionMap; 2],
    data: &WeightedDataset,
) -> Result<WeightedDataset> {
    if !same_support(maps[0].target(), maps[1].target()) {
        return Err(Error::SupportMismatch);
    }
    for m in maps {
        if !same_support(m.source(), data.support()) {
            return Err(Error::SupportMismatch);
        }
    }
    let mut rows = Vec::with_capacity(data.len());
    for row in data.rows() {
        let g = row
            .s
            .filter(|&g| g <= GROUP_1)
            .ok_or_else(|| Error::EmptyGroup(format!("row {} has no group tag", row.origin)))?;
        split_rows(&mut rows, row, maps[g as usize])?;
    }
    WeightedDataset::new(maps[0].target().clone(), data.neutral_columns.clone(), rows)
}

/// Header plus string records, as read from a CSV file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub records: Vec<Vec<String>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    /// Parses the named column as numbers.
    pub fn numeric(&self, name: &str) -> Result<Vec<f64>> {
        let c = self.column(name)?;
        self.records
            .iter()
            .enumerate()
            .map(|(r, rec)| {
                let cell = rec.get(c).map(|s| s.trim()).unwrap_or("");
                cell.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::ParseError {
                        row: r + 1,
                        column: name.to_string(),
                        message: format!("{cell:?} is not a finite number"),
                    })
            })
            .collect()
    }

    /// The adjusted-feature tuple of every record.
    pub fn points(&self, columns: &[String]) -> Result<Vec<Point>> {
        if columns.is_empty() {
            return Err(Error::InvalidArgument("no adjusted columns given".into()));
        }
        let cols: Vec<Vec<f64>> = columns
            .iter()
            .map(|c| self.numeric(c))
            .collect::<Result<_>>()?;
        Ok((0..self.records.len())
            .map(|r| Point::new(cols.iter().map(|c| c[r]).collect()))
            .collect())
    }
}

/// Support of the distinct adjusted-feature tuples present in `table`,
/// lexicographically ordered.
pub fn tuple_support(table: &Table, columns: &[String]) -> Result<Support> {
    if table.records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Support::from_observed(table.points(columns)?)
}
