//! Accuracy and fairness indices: group-decomposed F1 scores, disparate
//! impact, the S-wise TV distance and the weighted-score threshold rule used
//! on split samples.

use serde::Serialize;

use crate::distributions::tv_distance;
use crate::error::{Error, Result};
use crate::projection::{WeightedDataset, GROUP_0, GROUP_1};
use crate::solvers::StopReason;

pub const DEFAULT_CLASSIFIER_THRESHOLD: f64 = 0.1;

/// Per-group confusion counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl Confusion {
    fn add(&mut self, pred: u8, label: u8) {
        match (pred, label) {
            (1, 1) => self.tp += 1,
            (1, _) => self.fp += 1,
            (_, 1) => self.fn_ += 1,
            _ => self.tn += 1,
        }
    }

    fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// `2TP / (2TP + FP + FN)`; a group with neither positives nor positive
    /// predictions is scored as perfect.
    pub fn f1(&self) -> f64 {
        let den = 2 * self.tp + self.fp + self.fn_;
        if den == 0 {
            1.0
        } else {
            (2 * self.tp) as f64 / den as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct F1Scores {
    pub micro: f64,
    pub macro_: f64,
    pub weighted: f64,
    #[serde(skip)]
    pub counts: [Confusion; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    /// F1 indices are absent when the data carry no labels.
    pub f1_micro: Option<f64>,
    pub f1_macro: Option<f64>,
    pub f1_weighted: Option<f64>,
    pub disparate_impact: f64,
    pub swise_tv: f64,
    /// Solver iterations, absent for the identity projection.
    pub iterations: Option<usize>,
    pub stop_reason: Option<StopReason>,
    #[serde(skip)]
    pub counts: Option<[Confusion; 2]>,
}

/// `Ŷ = 1` iff the weighted mean score of a sample's pieces reaches
/// `threshold`; ties go to the positive class.
///
/// Weights are normalised within each sample, so pieces of a unit-weight
/// sample contribute `Σ w·score` exactly.
pub fn threshold_classify(grouped: &[Vec<(f64, f64)>], threshold: f64) -> Result<Vec<u8>> {
    grouped
        .iter()
        .enumerate()
        .map(|(i, pieces)| {
            let total: f64 = pieces.iter().map(|(w, _)| w).sum();
            if pieces.iter().any(|(w, _)| !(*w >= 0.0)) {
                return Err(Error::InvalidArgument(format!(
                    "sample {i} has a negative weight"
                )));
            }
            if !(total > 0.0) {
                return Err(Error::EmptySample(i));
            }
            let mut acc: f64 = pieces.iter().map(|(w, s)| w * s).sum();
            if total != 1.0 {
                acc /= total;
            }
            Ok(u8::from(acc >= threshold))
        })
        .collect()
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::LengthMismatch {
            expected: a,
            actual: b,
        });
    }
    Ok(())
}

fn group_slot(g: u8) -> Result<usize> {
    match g {
        GROUP_0 => Ok(0),
        GROUP_1 => Ok(1),
        other => Err(Error::InvalidArgument(format!(
            "group tag {other} is not binary"
        ))),
    }
}

/// Micro, macro and `P^S`-weighted F1 over the per-group confusion counts.
///
/// Macro averages over the groups present, which is `½ Σ_s` for two groups.
pub fn f1_scores(predictions: &[u8], labels: &[u8], groups: &[u8]) -> Result<F1Scores> {
    check_lengths(predictions.len(), labels.len())?;
    check_lengths(predictions.len(), groups.len())?;
    if predictions.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut counts = [Confusion::default(); 2];
    for ((&p, &y), &g) in predictions.iter().zip(labels).zip(groups) {
        counts[group_slot(g)?].add(p, y);
    }
    let n = predictions.len() as f64;
    let present: Vec<&Confusion> = counts.iter().filter(|c| c.total() > 0).collect();
    let num: u64 = present.iter().map(|c| 2 * c.tp).sum();
    let den: u64 = present.iter().map(|c| 2 * c.tp + c.fp + c.fn_).sum();
    let micro = if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    };
    let macro_ = present.iter().map(|c| c.f1()).sum::<f64>() / present.len() as f64;
    let weighted = present.iter().map(|c| c.total() as f64 / n * c.f1()).sum();
    Ok(F1Scores {
        micro,
        macro_,
        weighted,
        counts,
    })
}

/// `P(Ŷ=1 | s₀) / P(Ŷ=1 | s₁)`.
pub fn disparate_impact(predictions: &[u8], groups: &[u8]) -> Result<f64> {
    check_lengths(predictions.len(), groups.len())?;
    let mut pos = [0u64; 2];
    let mut tot = [0u64; 2];
    for (&p, &g) in predictions.iter().zip(groups) {
        let k = group_slot(g)?;
        tot[k] += 1;
        pos[k] += u64::from(p == 1);
    }
    for (k, &t) in tot.iter().enumerate() {
        if t == 0 {
            return Err(Error::EmptyGroup(k.to_string()));
        }
    }
    if pos[1] == 0 {
        return Err(Error::ZeroPrivilegedPositiveRate);
    }
    let r0 = pos[0] as f64 / tot[0] as f64;
    let r1 = pos[1] as f64 / tot[1] as f64;
    Ok(r0 / r1)
}

/// TV distance between the two group-wise weighted empirical distributions.
pub fn swise_tv(data: &WeightedDataset) -> Result<f64> {
    let p0 = data.group_distribution(GROUP_0)?;
    let p1 = data.group_distribution(GROUP_1)?;
    tv_distance(&p0, &p1)
}
