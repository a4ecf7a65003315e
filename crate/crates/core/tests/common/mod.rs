#![allow(dead_code)]

use std::sync::Arc;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use blindrepair::projection::{WeightedDataset, WeightedRow};
use blindrepair::{make_simplex, repair_vector, RepairVector, SimplexVector, Support};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn grid(n: usize) -> Arc<Support> {
    Arc::new(Support::integer_range(0, n as i64 - 1).unwrap())
}

/// Strictly positive probability vector.
pub fn simplex(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|v| v / s).collect()
}

pub fn positive_matrix(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, m), |_| rng.random_range(0.05..1.0))
}

/// `(P, P0, P1, V)` from two random group conditionals mixed by a random
/// share, so `⟨P, V⟩ = 0` by construction.
pub fn mixed_instance(
    rng: &mut ChaCha8Rng,
    s: &Arc<Support>,
) -> (SimplexVector, SimplexVector, SimplexVector, RepairVector) {
    let n = s.len();
    let w0 = simplex(rng, n);
    let w1 = simplex(rng, n);
    let pi: f64 = rng.random_range(0.1..0.9);
    let pooled = w0
        .iter()
        .zip(&w1)
        .map(|(a, b)| pi * a + (1.0 - pi) * b)
        .collect();
    let p = make_simplex(pooled, s.clone()).unwrap();
    let p0 = make_simplex(w0, s.clone()).unwrap();
    let p1 = make_simplex(w1, s.clone()).unwrap();
    let v = repair_vector(&p, &p0, &p1).unwrap();
    (p, p0, p1, v)
}

/// `Σ g (ln(g/r) − 1)` with `0 ln 0 = 0`.
pub fn kl(g: &Array2<f64>, r: &Array2<f64>) -> f64 {
    g.iter()
        .zip(r.iter())
        .map(|(&a, &b)| {
            if a == 0.0 {
                0.0
            } else {
                a * ((a / b).ln() - 1.0)
            }
        })
        .sum()
}

pub fn row_sums(g: &Array2<f64>) -> Vec<f64> {
    g.rows().into_iter().map(|r| r.sum()).collect()
}

pub fn col_sums(g: &Array2<f64>) -> Vec<f64> {
    g.columns().into_iter().map(|c| c.sum()).collect()
}

/// `[γ'V]_j` by a plain double loop.
pub fn loads(g: &Array2<f64>, v: &[f64]) -> Vec<f64> {
    (0..g.ncols())
        .map(|j| (0..g.nrows()).map(|i| g[[i, j]] * v[i]).sum())
        .collect()
}

pub fn scale_rows(g: &Array2<f64>, p: &[f64]) -> Array2<f64> {
    let mut out = g.clone();
    for (mut row, &pi) in out.rows_mut().into_iter().zip(p) {
        let s = row.sum();
        row.mapv_inplace(|x| x * pi / s);
    }
    out
}

pub fn scale_cols(g: &Array2<f64>, q: &[f64]) -> Array2<f64> {
    let mut out = g.clone();
    for (mut col, &qj) in out.columns_mut().into_iter().zip(q) {
        let s = col.sum();
        col.mapv_inplace(|x| x * qj / s);
    }
    out
}

/// Random positive coupling with row sums exactly `p`.
pub fn coupling_with_rows(rng: &mut ChaCha8Rng, p: &[f64], m: usize) -> Array2<f64> {
    scale_rows(&positive_matrix(rng, p.len(), m), p)
}

/// Random dataset on `support` with both groups present and random weights.
pub fn random_dataset(
    rng: &mut ChaCha8Rng,
    support: &Arc<Support>,
    rows: usize,
) -> WeightedDataset {
    let n = support.len();
    let mut out: Vec<WeightedRow> = (0..rows)
        .map(|k| WeightedRow {
            x: rng.random_range(0..n),
            u: vec![format!("u{k}")],
            s: Some(u8::from(rng.random_bool(0.4))),
            y: Some(u8::from(rng.random_bool(0.5))),
            score: Some(rng.random_range(0.0..1.0)),
            w: rng.random_range(0.1..3.0),
            origin: k,
        })
        .collect();
    out[0].s = Some(0);
    out[1].s = Some(1);
    // every support point observed so the pooled distribution has no holes
    for (i, r) in out.iter_mut().take(n).enumerate() {
        r.x = i;
    }
    WeightedDataset::new(support.clone(), vec!["u".into()], out).unwrap()
}
