//! End-to-end runs: fit a coupling, project the data, score it.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::distributions::{repair_vector, RepairVector, SimplexVector, Support};
use crate::error::{Error, Result};
use crate::metrics::{disparate_impact, f1_scores, swise_tv, threshold_classify, MetricsReport};
use crate::pipeline::config::{
    CostWeightsMode, Method, RunConfig, SYNTHETIC_VAREPSILON, TABULAR_VAREPSILON,
};
use crate::projection::{
    apply_group_maps, apply_map, build_map, plan_map, ProjectionMap, WeightedDataset, GROUP_0,
    GROUP_1,
};
use crate::solvers::{
    barycentre_coupling, barycentre_maps, bregman_baseline, dykstra_repair, DykstraOptions,
    SolverTrace,
};
use crate::transport::{cost_matrix, BandConstraint, CostMatrix, Coupling};
use crate::Point;

/// Which experimental protocol supplies the defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    Synthetic,
    Tabular,
}

impl DataKind {
    pub fn default_varepsilon(self) -> f64 {
        match self {
            DataKind::Synthetic => SYNTHETIC_VAREPSILON,
            DataKind::Tabular => TABULAR_VAREPSILON,
        }
    }

    pub fn default_cost_weights(self) -> CostWeightsMode {
        match self {
            DataKind::Synthetic => CostWeightsMode::Unit,
            DataKind::Tabular => CostWeightsMode::ReciprocalRange,
        }
    }
}

/// Stand-in classifier for runs without a score column: predicts 1 when
/// the sum of standardised adjusted features is nonnegative, i.e. when
/// `sigmoid(Σ_d (x_d − m_d)/s_d) ≥ ½`. Means and deviations come from the
/// data it is fitted on.
#[derive(Debug, Clone, PartialEq)]
pub struct DemoScorer {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl DemoScorer {
    pub fn fit(data: &WeightedDataset) -> Result<Self> {
        let dim = data.support().dim();
        let total = data.total_weight();
        let mut mean = vec![0.0; dim];
        for r in data.rows() {
            for (m, x) in mean.iter_mut().zip(data.point(r).coords()) {
                *m += r.w * x / total;
            }
        }
        let mut var = vec![0.0; dim];
        for r in data.rows() {
            for ((v, m), x) in var.iter_mut().zip(&mean).zip(data.point(r).coords()) {
                *v += r.w * (x - m) * (x - m) / total;
            }
        }
        let scale = var
            .into_iter()
            .map(|v| if v > 0.0 { v.sqrt() } else { 1.0 })
            .collect();
        Ok(DemoScorer { mean, scale })
    }

    pub fn probability(&self, p: &Point) -> f64 {
        let z: f64 = p
            .coords()
            .iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((x, m), s)| (x - m) / s)
            .sum();
        1.0 / (1.0 + (-z).exp())
    }

    pub fn predict(&self, p: &Point) -> f64 {
        if self.probability(p) >= 0.5 {
            1.0
        } else {
            0.0
        }
    }
}

/// Per-support-point distributions before and after projection.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionTable {
    pub support: Arc<Support>,
    pub p_x: Vec<f64>,
    pub p_x_groups: Option<[Vec<f64>; 2]>,
    pub p_xt: Vec<f64>,
    pub p_xt_groups: Option<[Vec<f64>; 2]>,
    /// Target the coupling was fitted to, if any.
    pub target: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub method: Method,
    pub projected: WeightedDataset,
    pub coupling: Option<Coupling>,
    pub trace: Option<SolverTrace>,
    /// Absent when the data carry no group tags.
    pub report: Option<MetricsReport>,
    pub table: DistributionTable,
}

/// Everything a run needs besides the data and the config.
#[derive(Debug, Clone, Copy)]
pub struct RunInputs<'a> {
    pub kind: DataKind,
    /// Defaults to `P^X` of the data.
    pub target: Option<&'a SimplexVector>,
    /// Externally supplied `V`; otherwise computed from the group tags.
    pub v: Option<&'a RepairVector>,
    /// Used when the config names no score column; fitted on the run's own
    /// data when absent.
    pub scorer: Option<&'a DemoScorer>,
}

impl<'a> RunInputs<'a> {
    pub fn new(kind: DataKind) -> Self {
        RunInputs {
            kind,
            target: None,
            v: None,
            scorer: None,
        }
    }
}

pub fn cost_weights(
    support: &Support,
    mode: CostWeightsMode,
    explicit: &[f64],
) -> Result<Vec<f64>> {
    let dim = support.dim();
    match mode {
        CostWeightsMode::Unit => Ok(vec![1.0; dim]),
        CostWeightsMode::Explicit => Ok(explicit.to_vec()),
        CostWeightsMode::ReciprocalRange => Ok((0..dim)
            .map(|d| {
                let (lo, hi) = support
                    .points()
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                        (lo.min(p.coords()[d]), hi.max(p.coords()[d]))
                    });
                if hi > lo {
                    1.0 / (hi - lo)
                } else {
                    1.0
                }
            })
            .collect()),
    }
}

pub fn run_cost(support: &Support, kind: DataKind, config: &RunConfig) -> Result<CostMatrix> {
    let mode = config.cost_weights.unwrap_or(kind.default_cost_weights());
    let w = cost_weights(support, mode, &config.explicit_weights)?;
    cost_matrix(support, support, &w)
}

/// `V` from the data's group-conditional distributions.
pub fn data_repair_vector(data: &WeightedDataset) -> Result<RepairVector> {
    let px = data.distribution()?;
    repair_vector(
        &px,
        &data.group_distribution(GROUP_0)?,
        &data.group_distribution(GROUP_1)?,
    )
}

fn has_groups(data: &WeightedDataset) -> bool {
    data.rows().iter().all(|r| r.s.is_some())
}

/// Fit, project and evaluate.
///
/// For `baseline` and `dykstra` the fit sees only `P^X`, the target and
/// `V`; group tags are consulted to build `V` when it is not supplied and
/// for evaluation. `barycentre` is group-aware by construction.
pub fn run_repair(
    data: &WeightedDataset,
    inputs: RunInputs<'_>,
    config: &RunConfig,
    method: Method,
) -> Result<RunOutput> {
    config.validate()?;
    let support = data.support().clone();
    let px = data.without_groups().distribution()?;
    let q = match inputs.target {
        Some(t) if !crate::distributions::same_support(t.support(), &support) => {
            return Err(Error::SupportMismatch)
        }
        Some(t) => t.clone(),
        None => px.clone(),
    };
    let k = config.iterations_for(method);

    let (projected, coupling, trace) = match method {
        Method::None => (
            apply_map(&ProjectionMap::identity(support.clone()), data)?,
            None,
            None,
        ),
        Method::Baseline => {
            let cost = run_cost(&support, inputs.kind, config)?;
            let (g, trace) = bregman_baseline(&px, &q, &cost, config.epsilon, k)?;
            let map = build_map(&g, &px)?;
            (apply_map(&map, data)?, Some(g), Some(trace))
        }
        Method::Dykstra => {
            let v = match inputs.v {
                Some(v) => v.clone(),
                None => data_repair_vector(data)?,
            };
            let band = BandConstraint::new(v, config.lambda.expand(support.len())?)?;
            let cost = run_cost(&support, inputs.kind, config)?;
            let opts = DykstraOptions {
                iterations: k,
                varepsilon: config
                    .varepsilon
                    .unwrap_or(inputs.kind.default_varepsilon()),
                schedule: config.schedule,
                early_exit: config.early_exit,
            };
            let (g, trace) = dykstra_repair(&px, &q, &band, &cost, config.epsilon, &opts)?;
            let map = build_map(&g, &px)?;
            (apply_map(&map, data)?, Some(g), Some(trace))
        }
        Method::Barycentre => {
            if !has_groups(data) {
                return Err(Error::Config(
                    "the barycentre baseline needs the group column at fit time".into(),
                ));
            }
            let p0 = data.group_distribution(GROUP_0)?;
            let p1 = data.group_distribution(GROUP_1)?;
            let [pi0, pi1] = data.group_shares()?;
            let cost = run_cost(&support, inputs.kind, config)?;
            let (g, trace) = barycentre_coupling(&p0, &p1, &cost, config.epsilon, k)?;
            let (m0, m1) = barycentre_maps(g.entries(), pi0, pi1, &support)?;
            let map0 = plan_map(&m0, support.clone(), support.clone())?;
            let map1 = plan_map(&m1, support.clone(), support.clone())?;
            (
                apply_group_maps([&map0, &map1], data)?,
                Some(g),
                Some(trace),
            )
        }
    };

    let report = if has_groups(data) {
        let fitted;
        let scorer = match inputs.scorer {
            Some(s) => Some(s),
            None if config.score_column.is_none() => {
                fitted = DemoScorer::fit(data)?;
                Some(&fitted)
            }
            None => None,
        };
        Some(evaluate(&projected, scorer, config, trace.as_ref())?)
    } else {
        None
    };

    let groups = |d: &WeightedDataset| -> Result<Option<[Vec<f64>; 2]>> {
        if !has_groups(d) {
            return Ok(None);
        }
        Ok(Some([
            d.group_distribution(GROUP_0)?.values().to_vec(),
            d.group_distribution(GROUP_1)?.values().to_vec(),
        ]))
    };
    let table = DistributionTable {
        support: support.clone(),
        p_x: px.values().to_vec(),
        p_x_groups: groups(data)?,
        p_xt: projected.distribution()?.values().to_vec(),
        p_xt_groups: groups(&projected)?,
        target: (method != Method::None).then(|| q.values().to_vec()),
    };

    Ok(RunOutput {
        method,
        projected,
        coupling,
        trace,
        report,
        table,
    })
}

/// Per original sample: its pieces as `(weight, score)`, its group and its
/// label. Pieces of one sample are contiguous in a projected dataset.
#[allow(clippy::type_complexity)]
fn per_sample(
    data: &WeightedDataset,
    scorer: Option<&DemoScorer>,
) -> Result<(Vec<Vec<(f64, f64)>>, Vec<u8>, Vec<Option<u8>>)> {
    let mut pieces: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut groups = Vec::new();
    let mut labels = Vec::new();
    let mut last = None;
    for r in data.rows() {
        let score = match scorer {
            Some(s) => s.predict(data.point(r)),
            None => r.score.ok_or_else(|| {
                Error::Config(format!(
                    "row {} has no score and no scorer is set",
                    r.origin
                ))
            })?,
        };
        if last != Some(r.origin) {
            pieces.push(Vec::new());
            groups.push(r.s.ok_or_else(|| Error::EmptyGroup("untagged row".into()))?);
            labels.push(r.y);
            last = Some(r.origin);
        }
        pieces.last_mut().unwrap().push((r.w, score));
    }
    Ok((pieces, groups, labels))
}

/// Metrics of a (projected) dataset.
pub fn evaluate(
    data: &WeightedDataset,
    scorer: Option<&DemoScorer>,
    config: &RunConfig,
    trace: Option<&SolverTrace>,
) -> Result<MetricsReport> {
    let (pieces, groups, labels) = per_sample(data, scorer)?;
    let preds = threshold_classify(&pieces, config.classifier_threshold)?;
    let di = disparate_impact(&preds, &groups)?;
    let tv = swise_tv(data)?;
    let labels: Option<Vec<u8>> = labels.into_iter().collect();
    let f1 = labels.map(|y| f1_scores(&preds, &y, &groups)).transpose()?;
    Ok(MetricsReport {
        f1_micro: f1.map(|f| f.micro),
        f1_macro: f1.map(|f| f.macro_),
        f1_weighted: f1.map(|f| f.weighted),
        disparate_impact: di,
        swise_tv: tv,
        iterations: trace.map(|t| t.iterations()),
        stop_reason: trace.map(|t| t.stop_reason),
        counts: f1.map(|f| f.counts),
    })
}
