//! The two-group Gaussian example on an integer grid.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal as StatNormal};

use crate::distributions::{make_simplex, SimplexVector, Support};
use crate::error::{Error, Result};
use crate::projection::{WeightedDataset, WeightedRow, GROUP_0, GROUP_1};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub support_lo: i64,
    pub support_hi: i64,
    /// `P(s₀)`; `P(s₁) = 1 − P(s₀)`.
    pub p_s0: f64,
    /// `(μ, σ)` of group `s₀` and `s₁`.
    pub groups: [(f64, f64); 2],
    pub target: (f64, f64),
    pub samples: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            support_lo: -30,
            support_hi: 10,
            p_s0: 0.7,
            groups: [(-10.0, 6.0), (1.0, 3.0)],
            target: (-5.0, 5.0),
            samples: 10_000,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.support_lo > self.support_hi {
            return Err(Error::Config(
                "support lower bound exceeds upper bound".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.p_s0) {
            return Err(Error::Config(format!(
                "P(s0) = {} is not a probability",
                self.p_s0
            )));
        }
        let sigmas = [self.groups[0].1, self.groups[1].1, self.target.1];
        if sigmas.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::Config("standard deviations must be positive".into()));
        }
        if self.samples == 0 {
            return Err(Error::Config("sample count must be positive".into()));
        }
        Ok(())
    }

    pub fn support(&self) -> Result<Arc<Support>> {
        Ok(Arc::new(Support::integer_range(
            self.support_lo,
            self.support_hi,
        )?))
    }

    /// `N(μ, σ²)` floored onto the grid with both tails folded into the end
    /// points, i.e. the law of `clamp(⌊X⌋)`.
    pub fn target_distribution(&self) -> Result<SimplexVector> {
        let support = self.support()?;
        let (mu, sigma) = self.target;
        let law = StatNormal::new(mu, sigma)
            .map_err(|e| Error::Config(format!("target Gaussian: {e}")))?;
        let (lo, hi) = (self.support_lo, self.support_hi);
        let values = (lo..=hi)
            .map(|j| {
                let upper = if j == hi {
                    1.0
                } else {
                    law.cdf((j + 1) as f64)
                };
                let lower = if j == lo { 0.0 } else { law.cdf(j as f64) };
                upper - lower
            })
            .collect();
        make_simplex(values, support)
    }
}

/// Draws `M` samples: a uniform below `P(s₀)` picks group `s₀`, then the
/// value is the floor of that group's Gaussian, clamped into the support.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<WeightedDataset> {
    spec.validate()?;
    let support = spec.support()?;
    let normals = [
        Normal::new(spec.groups[0].0, spec.groups[0].1)
            .map_err(|e| Error::Config(format!("group 0 Gaussian: {e}")))?,
        Normal::new(spec.groups[1].0, spec.groups[1].1)
            .map_err(|e| Error::Config(format!("group 1 Gaussian: {e}")))?,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let rows = (0..spec.samples)
        .map(|m| {
            let g = if rng.random::<f64>() < spec.p_s0 {
                GROUP_0
            } else {
                GROUP_1
            };
            let draw: f64 = normals[g as usize].sample(&mut rng);
            let v = (draw.floor() as i64).clamp(spec.support_lo, spec.support_hi);
            WeightedRow {
                x: (v - spec.support_lo) as usize,
                u: Vec::new(),
                s: Some(g),
                y: None,
                score: None,
                w: 1.0,
                origin: m,
            }
        })
        .collect();
    WeightedDataset::new(support, Vec::new(), rows)
}
