//! Run configuration with the experiment defaults.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solvers::{
    DykstraSchedule, EarlyExit, DEFAULT_BARYCENTRE_ITERATIONS, DEFAULT_BASELINE_ITERATIONS,
    DEFAULT_REPAIR_ITERATIONS,
};

pub const DEFAULT_EPSILON: f64 = 0.01;
pub const SYNTHETIC_VAREPSILON: f64 = 1e-4;
pub const TABULAR_VAREPSILON: f64 = 1e-5;
pub const DEFAULT_TV_THRESHOLD: f64 = 0.08;
pub const DEFAULT_TRAIN_FRAC: f64 = 0.6;

/// Repair method of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Identity projection; metrics describe the raw data.
    None,
    Baseline,
    Dykstra,
    Barycentre,
}

impl Method {
    pub fn default_iterations(self) -> usize {
        match self {
            Method::Dykstra => DEFAULT_REPAIR_ITERATIONS,
            Method::Baseline => DEFAULT_BASELINE_ITERATIONS,
            Method::Barycentre => DEFAULT_BARYCENTRE_ITERATIONS,
            Method::None => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::None => "none",
            Method::Baseline => "baseline",
            Method::Dykstra => "dykstra",
            Method::Barycentre => "barycentre",
        }
    }
}

/// `Λ` either broadcast from a scalar or given per support point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Lambda {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl Default for Lambda {
    fn default() -> Self {
        Lambda::Scalar(0.0)
    }
}

impl Lambda {
    pub fn expand(&self, n: usize) -> Result<Vec<f64>> {
        match self {
            Lambda::Scalar(l) => Ok(vec![*l; n]),
            Lambda::Vector(v) if v.len() == n => Ok(v.clone()),
            Lambda::Vector(v) => Err(Error::Config(format!(
                "lambda has {} entries but the support has {n} points",
                v.len()
            ))),
        }
    }

    /// Parses `0.01` or `0.01,0.02,...`.
    pub fn parse(s: &str) -> Result<Self> {
        let vals: Vec<f64> = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad lambda entry {t:?}")))
            })
            .collect::<Result<_>>()?;
        Ok(if vals.len() == 1 {
            Lambda::Scalar(vals[0])
        } else {
            Lambda::Vector(vals)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostWeightsMode {
    Unit,
    /// `g_d = 1 / (max_d − min_d)` over the support.
    ReciprocalRange,
    Explicit,
}

impl std::str::FromStr for CostWeightsMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit" => Ok(CostWeightsMode::Unit),
            "reciprocal-range" => Ok(CostWeightsMode::ReciprocalRange),
            "explicit" => Ok(CostWeightsMode::Explicit),
            _ => Err(Error::Config(format!("unknown cost weights mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub epsilon: f64,
    pub lambda: Lambda,
    /// `None` uses the method's default.
    pub iterations: Option<usize>,
    /// `None` uses 1e-4 for synthetic data and 1e-5 for tabular data.
    pub varepsilon: Option<f64>,
    pub adjusted_columns: Vec<String>,
    /// Evaluation only, except for the barycentre baseline.
    pub group_column: Option<String>,
    /// Raw values of the group column read as `s₀` and `s₁`; other rows are
    /// dropped.
    pub group_values: [String; 2],
    pub label_column: Option<String>,
    pub positive_labels: Vec<String>,
    pub score_column: Option<String>,
    pub weight_column: Option<String>,
    /// `None` picks unit weights for synthetic and reciprocal-range for
    /// tabular data.
    pub cost_weights: Option<CostWeightsMode>,
    pub explicit_weights: Vec<f64>,
    pub tv_threshold: f64,
    pub classifier_threshold: f64,
    /// Decimal places kept per adjusted column at ingestion.
    pub rounding: BTreeMap<String, i32>,
    pub schedule: DykstraSchedule,
    pub early_exit: EarlyExit,
    pub seed: u64,
    pub trials: usize,
    pub train_frac: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            epsilon: DEFAULT_EPSILON,
            lambda: Lambda::default(),
            iterations: None,
            varepsilon: None,
            adjusted_columns: Vec::new(),
            group_column: None,
            group_values: ["0".into(), "1".into()],
            label_column: None,
            positive_labels: vec!["1".into()],
            score_column: None,
            weight_column: None,
            cost_weights: None,
            explicit_weights: Vec::new(),
            tv_threshold: DEFAULT_TV_THRESHOLD,
            classifier_threshold: crate::metrics::DEFAULT_CLASSIFIER_THRESHOLD,
            rounding: BTreeMap::new(),
            schedule: DykstraSchedule::default(),
            early_exit: EarlyExit::default(),
            seed: 0,
            trials: 0,
            train_frac: DEFAULT_TRAIN_FRAC,
        }
    }
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn iterations_for(&self, method: Method) -> usize {
        self.iterations
            .unwrap_or_else(|| method.default_iterations())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::NonPositiveEpsilon(self.epsilon));
        }
        if let Some(v) = self.varepsilon {
            if !(v > 0.0) {
                return Err(Error::Config(format!(
                    "varepsilon must be positive, got {v}"
                )));
            }
        }
        let lam_ok = match &self.lambda {
            Lambda::Scalar(l) => *l >= 0.0,
            Lambda::Vector(v) => v.iter().all(|l| *l >= 0.0),
        };
        if !lam_ok {
            return Err(Error::Config("lambda entries must be nonnegative".into()));
        }
        if !(self.train_frac > 0.0 && self.train_frac < 1.0) {
            return Err(Error::Config(format!(
                "train fraction must lie in (0, 1), got {}",
                self.train_frac
            )));
        }
        if !(self.tv_threshold >= 0.0) {
            return Err(Error::Config("tv threshold must be nonnegative".into()));
        }
        if self.iterations == Some(0) {
            return Err(Error::Config("iterations must be positive".into()));
        }
        if self.cost_weights == Some(CostWeightsMode::Explicit) && self.explicit_weights.is_empty()
        {
            return Err(Error::Config(
                "explicit cost weights requested but none given".into(),
            ));
        }
        Ok(())
    }

    /// Requires at least one adjusted column, for tabular input.
    pub fn validate_tabular(&self) -> Result<()> {
        self.validate()?;
        if self.adjusted_columns.is_empty() {
            return Err(Error::Config("no adjusted columns configured".into()));
        }
        Ok(())
    }
}
