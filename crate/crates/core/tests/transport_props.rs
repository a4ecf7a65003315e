mod common;

use ndarray::Array2;
use proptest::prelude::*;
use rand::Rng;

use blindrepair::transport::{
    prox_band, prox_capacity, prox_cols, prox_cols_leq, prox_rows, prox_rows_leq, prox_total_mass,
};
use blindrepair::{cost_matrix, gibbs_kernel, BandConstraint, Support};

use common::*;

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

/// Every entry of `out` is `in` times a factor that depends only on the row.
fn row_scaled(input: &Array2<f64>, out: &Array2<f64>) -> bool {
    input.rows().into_iter().zip(out.rows()).all(|(a, b)| {
        let f = b[0] / a[0];
        a.iter()
            .zip(b.iter())
            .all(|(x, y)| rel_close(y / x, f, 1e-12))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn row_and_column_proxes(seed in any::<u64>(), n in 1usize..8, m in 1usize..8) {
        let mut r = rng(seed);
        let g = positive_matrix(&mut r, n, m);
        let p = simplex(&mut r, n);
        let q = simplex(&mut r, m);

        let rows = prox_rows(g.view(), &p).unwrap();
        prop_assert!(rows.iter().all(|&x| x >= 0.0));
        for (s, t) in row_sums(&rows).iter().zip(&p) {
            prop_assert!(rel_close(*s, *t, 1e-13));
        }
        prop_assert!(row_scaled(&g, &rows));

        let cols = prox_cols(g.view(), &q).unwrap();
        for (s, t) in col_sums(&cols).iter().zip(&q) {
            prop_assert!(rel_close(*s, *t, 1e-13));
        }
        // columns are rows of the transpose
        let via_t = prox_rows(g.t(), &q).unwrap();
        for (a, b) in cols.t().iter().zip(via_t.iter()) {
            prop_assert!(rel_close(*a, *b, 1e-15));
        }
    }

    #[test]
    fn inequality_proxes_only_shrink(seed in any::<u64>(), n in 1usize..7, m in 1usize..7) {
        let mut r = rng(seed);
        let g = positive_matrix(&mut r, n, m);
        let cap: Vec<f64> = (0..n).map(|_| r.random_range(0.0..(m as f64))).collect();
        let out = prox_rows_leq(g.view(), &cap).unwrap();
        for ((i, s_in), s_out) in row_sums(&g).iter().enumerate().zip(row_sums(&out)) {
            prop_assert!(s_out <= cap[i] * (1.0 + 1e-13));
            if *s_in <= cap[i] {
                prop_assert!(g.row(i) == out.row(i));
            } else {
                prop_assert!(rel_close(s_out, cap[i], 1e-13));
            }
        }
        let cap: Vec<f64> = (0..m).map(|_| r.random_range(0.0..(n as f64))).collect();
        let out = prox_cols_leq(g.view(), &cap).unwrap();
        for (j, s) in col_sums(&out).iter().enumerate() {
            prop_assert!(*s <= cap[j] * (1.0 + 1e-13));
        }
    }

    #[test]
    fn mass_and_capacity_proxes(seed in any::<u64>(), n in 1usize..7, m in 1usize..7, eta in 0.01f64..10.0) {
        let mut r = rng(seed);
        let g = positive_matrix(&mut r, n, m);
        let total = prox_total_mass(g.view(), eta).unwrap();
        prop_assert!(rel_close(total.sum(), eta, 1e-13));
        let f = total[(0, 0)] / g[(0, 0)];
        prop_assert!(g.iter().zip(total.iter()).all(|(a, b)| rel_close(b / a, f, 1e-12)));

        let cap = positive_matrix(&mut r, n, m);
        let out = prox_capacity(g.view(), cap.view()).unwrap();
        for ((a, b), c) in g.iter().zip(out.iter()).zip(cap.iter()) {
            prop_assert_eq!(b.to_bits(), a.min(*c).to_bits());
        }
    }

    #[test]
    fn band_prox_structure(seed in any::<u64>(), n in 2usize..8, width in 0.0f64..0.05) {
        let mut r = rng(seed);
        let s = grid(n);
        let (_, _, _, v) = mixed_instance(&mut r, &s);
        let g = positive_matrix(&mut r, n, n) / (n * n) as f64;
        let band = BandConstraint::uniform(v.clone(), width).unwrap();
        let before = loads(&g, v.values());
        let out = prox_band(g.view(), &band).unwrap();
        let after = loads(&out, v.values());
        prop_assert!(out.iter().all(|&x| x > 0.0));
        for j in 0..n {
            if before[j].abs() <= width {
                prop_assert!(g.column(j).iter().zip(out.column(j)).all(|(a, b)| a.to_bits() == b.to_bits()));
                continue;
            }
            // lands on the nearer edge
            let edge = width * before[j].signum();
            prop_assert!((after[j] - edge).abs() <= 1e-9, "col {} load {} edge {}", j, after[j], edge);
            // and the correction is exp(−V_i ν) for one ν per column
            let nus: Vec<f64> = (0..n)
                .filter(|&i| v.values()[i] != 0.0)
                .map(|i| -(out[(i, j)] / g[(i, j)]).ln() / v.values()[i])
                .collect();
            let nu = nus[0];
            prop_assert!(nus.iter().all(|x| (x - nu).abs() <= 1e-8 * nu.abs().max(1.0)));
            prop_assert!(nu * before[j].signum() > 0.0);
        }
        for i in 0..n {
            if v.values()[i] == 0.0 {
                prop_assert!(g.row(i) == out.row(i));
            }
        }
    }

    #[test]
    fn band_prox_is_kl_closest_on_the_edge(seed in any::<u64>(), n in 2usize..6) {
        // perturbing the corrected column along directions that keep its
        // load fixed can only increase KL to the input
        let mut r = rng(seed);
        let s = grid(n);
        let (_, _, _, v) = mixed_instance(&mut r, &s);
        let g = positive_matrix(&mut r, n, n) / (n * n) as f64;
        let band = BandConstraint::uniform(v.clone(), 0.0).unwrap();
        let out = prox_band(g.view(), &band).unwrap();
        let base = kl(&out, &g);
        let vv = v.values();
        let vn: f64 = vv.iter().map(|x| x * x).sum();
        for _ in 0..20 {
            let j = r.random_range(0..n);
            let mut d: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
            let dv: f64 = d.iter().zip(vv).map(|(a, b)| a * b).sum();
            d.iter_mut().zip(vv).for_each(|(a, b)| *a -= dv / vn * b);
            let step = 1e-3 * (0..n).map(|i| out[(i, j)]).fold(f64::INFINITY, f64::min);
            let mut moved = out.clone();
            for i in 0..n {
                moved[(i, j)] += step * d[i];
            }
            prop_assert!(kl(&moved, &g) >= base - 1e-15);
        }
    }

    #[test]
    fn kernel_is_positive_and_ordered(n in 1usize..12, eps in 0.005f64..5.0) {
        let s = Support::integer_range(0, n as i64 - 1).unwrap();
        let c = cost_matrix(&s, &s, &[1.0]).unwrap();
        let k = gibbs_kernel(&c, eps).unwrap();
        prop_assert!(k.iter().all(|&x| x > 0.0 && x <= 1.0));
        for i in 0..n {
            prop_assert_eq!(k[(i, i)], 1.0);
            for j in 1..n {
                if j > i {
                    prop_assert!(k[(i, j)] <= k[(i, j - 1)]);
                }
            }
        }
        // symmetric cost, zero diagonal and the triangle inequality
        let e = c.entries();
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(e[(i, j)], e[(j, i)]);
                for l in 0..n {
                    prop_assert!(e[(i, l)] <= e[(i, j)] + e[(j, l)] + 1e-12);
                }
            }
        }
    }
}
