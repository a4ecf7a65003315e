//! Repeated random train/test splits: the scorer is fitted on the training
//! part, every variant repairs and scores the test part.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::MetricsReport;
use crate::pipeline::config::{Lambda, Method, RunConfig};
use crate::pipeline::run::{run_repair, DemoScorer, RunInputs};
use crate::projection::WeightedDataset;

#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub label: String,
    pub method: Method,
    /// Overrides the configured `Λ` for this variant.
    pub lambda: Option<Lambda>,
}

impl Variant {
    pub fn new(label: &str, method: Method, lambda: Option<f64>) -> Self {
        Variant {
            label: label.to_string(),
            method,
            lambda: lambda.map(Lambda::Scalar),
        }
    }
}

/// Origin, baseline, `1e-2`- and `1e-3`-repair and barycentre.
pub fn standard_variants() -> Vec<Variant> {
    vec![
        Variant::new("origin", Method::None, None),
        Variant::new("baseline", Method::Baseline, None),
        Variant::new("repair-1e-2", Method::Dykstra, Some(1e-2)),
        Variant::new("repair-1e-3", Method::Dykstra, Some(1e-3)),
        Variant::new("barycentre", Method::Barycentre, None),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub label: String,
    pub reports: Vec<MetricsReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    /// Mean and sample standard deviation.
    pub fn of(xs: &[f64]) -> Option<Self> {
        if xs.is_empty() {
            return None;
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let std = if xs.len() > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Summary { mean, std })
    }
}

/// Randomly splits the original samples of `data`; `trial` selects an
/// independent stream of the master seed.
pub fn split(
    data: &WeightedDataset,
    train_frac: f64,
    seed: u64,
    trial: u64,
) -> Result<(WeightedDataset, WeightedDataset)> {
    let mut ids: Vec<usize> = data.rows().iter().map(|r| r.origin).collect();
    ids.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    ids.shuffle(&mut rng);
    let n_train = ((ids.len() as f64) * train_frac).round() as usize;
    if n_train == 0 || n_train >= ids.len() {
        return Err(Error::Config(format!(
            "train fraction {train_frac} leaves an empty split of {} samples",
            ids.len()
        )));
    }
    let mut in_train = vec![false; ids.iter().max().map_or(0, |m| m + 1)];
    for &i in &ids[..n_train] {
        in_train[i] = true;
    }
    Ok((
        data.filter_origins(|o| in_train[o])?,
        data.filter_origins(|o| !in_train[o])?,
    ))
}

pub fn run_trials(
    data: &WeightedDataset,
    inputs: RunInputs<'_>,
    config: &RunConfig,
    variants: &[Variant],
    trials: usize,
) -> Result<Vec<TrialResult>> {
    let mut results: Vec<TrialResult> = variants
        .iter()
        .map(|v| TrialResult {
            label: v.label.clone(),
            reports: Vec::with_capacity(trials),
        })
        .collect();
    for t in 0..trials {
        let (train, test) = split(data, config.train_frac, config.seed, t as u64)?;
        let scorer = DemoScorer::fit(&train)?;
        for (v, res) in variants.iter().zip(results.iter_mut()) {
            let mut cfg = config.clone();
            if let Some(l) = &v.lambda {
                cfg.lambda = l.clone();
            }
            let run_inputs = RunInputs {
                scorer: if config.score_column.is_some() {
                    None
                } else {
                    Some(&scorer)
                },
                ..inputs
            };
            let out = run_repair(&test, run_inputs, &cfg, v.method)?;
            let rep = out.report.ok_or_else(|| {
                Error::Config("trials need the group column for evaluation".into())
            })?;
            res.reports.push(rep);
        }
    }
    Ok(results)
}

type Field = fn(&MetricsReport) -> Option<f64>;

/// `label → metric → mean ± std`.
pub fn summarize(results: &[TrialResult]) -> BTreeMap<String, BTreeMap<&'static str, Summary>> {
    let mut out = BTreeMap::new();
    for r in results {
        let pick = |f: Field| -> Vec<f64> { r.reports.iter().filter_map(f).collect() };
        let mut m = BTreeMap::new();
        let fields: [(&'static str, Field); 5] = [
            ("f1_micro", |x| x.f1_micro),
            ("f1_macro", |x| x.f1_macro),
            ("f1_weighted", |x| x.f1_weighted),
            ("disparate_impact", |x| Some(x.disparate_impact)),
            ("swise_tv", |x| Some(x.swise_tv)),
        ];
        for (name, f) in fields {
            if let Some(s) = Summary::of(&pick(f)) {
                m.insert(name, s);
            }
        }
        out.insert(r.label.clone(), m);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::synthetic::{generate_synthetic, SyntheticSpec};

    #[test]
    fn split_partitions_samples() {
        let d = generate_synthetic(&SyntheticSpec {
            samples: 100,
            ..Default::default()
        })
        .unwrap();
        let (a, b) = split(&d, 0.6, 3, 0).unwrap();
        assert_eq!(a.len(), 60);
        assert_eq!(b.len(), 40);
        let (a2, _) = split(&d, 0.6, 3, 0).unwrap();
        assert_eq!(a, a2);
        let (a3, _) = split(&d, 0.6, 3, 1).unwrap();
        assert_ne!(a, a3);
    }

    #[test]
    fn summary_stats() {
        let s = Summary::of(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.std, 1.0);
        assert!(Summary::of(&[]).is_none());
    }
}
