use proptest::prelude::*;

use truncgauss::ball::{alpha, alpha_1d, alpha_batch, MultiIndex, Spectrum};
use truncgauss::eta::{eta_combinatorial, eta_fd_oracle, log_derivative_combinatorial, log_derivative_fd};
use truncgauss::moments::{inequality_battery, log_grid, marginal_normalization, PointIntegrals};
use truncgauss::report::VIOLATION_FACTOR;
use truncgauss::special::{lower_incomplete_gamma, regularized_lower_gamma};
use truncgauss::xi::XiMap;

fn spectrum_strategy(max_v: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.2f64..5.0, 1..=max_v)
}

fn alpha0(rho: f64, s: &Spectrum) -> f64 {
    alpha(&MultiIndex::zeros(s.dim()), rho, s).unwrap().value
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn increasing_in_rho(l in spectrum_strategy(3), r in 0.05f64..2.0, step in 0.05f64..0.5) {
        let s = Spectrum::new(l.clone()).unwrap();
        let total: f64 = l.iter().sum();
        let a = alpha0(r * total, &s);
        let b = alpha0((r + step) * total, &s);
        prop_assert!(b > a, "{a} {b}");
    }

    #[test]
    fn decreasing_in_each_variance(l in spectrum_strategy(3), rho in 0.2f64..6.0, j in 0usize..3, bump in 0.05f64..1.0) {
        let s = Spectrum::new(l.clone()).unwrap();
        let j = j % l.len();
        let t = s.with_entry(j, l[j] * (1.0 + bump));
        prop_assert!(alpha0(rho, &t) < alpha0(rho, &s));
    }

    #[test]
    fn log_concave_in_rho(l in spectrum_strategy(3), r1 in 0.05f64..8.0, r2 in 0.05f64..8.0, w in 0.0f64..1.0) {
        let s = Spectrum::new(l).unwrap();
        let mid = alpha0(w * r1 + (1.0 - w) * r2, &s);
        let geo = alpha0(r1, &s).powf(w) * alpha0(r2, &s).powf(1.0 - w);
        prop_assert!(mid >= geo * (1.0 - 1e-12), "{mid} {geo}");
    }

    #[test]
    fn battery_has_no_failures(l in spectrum_strategy(3), rho in 0.05f64..30.0) {
        let s = Spectrum::new(l).unwrap();
        let r = inequality_battery(rho, &s).unwrap();
        let failures: Vec<_> = r.failures().collect();
        prop_assert!(failures.is_empty(), "{failures:?}");
    }

    #[test]
    fn delta_is_non_positive(l in spectrum_strategy(4), ratio in -2.3f64..3.9) {
        let s = Spectrum::new(l).unwrap();
        let rho = s.max() * ratio.exp();
        let p = PointIntegrals::diagonal(rho, &s).unwrap();
        for n in 0..s.dim() {
            let d = p.delta(n);
            prop_assert!(d.value <= VIOLATION_FACTOR * d.err, "n={n} {d:?}");
        }
    }

    #[test]
    fn marginal_is_normalized(l in spectrum_strategy(3), rho in 0.1f64..20.0) {
        let s = Spectrum::new(l).unwrap();
        for n in 0..s.dim() {
            prop_assert!((marginal_normalization(n, rho, &s).unwrap() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn eta_routes_agree(l in spectrum_strategy(3), ratio in 0.5f64..12.0, k in 1usize..=3) {
        let s = Spectrum::new(l).unwrap();
        let rho = ratio * s.max();
        let c = eta_combinatorial(k, rho, &s).unwrap();
        let f = eta_fd_oracle(k, rho, &s).unwrap();
        prop_assert!((c - f).abs() / c.abs().max(1e-10) < 1e-3, "{c} {f}");
        let lc = log_derivative_combinatorial(k, rho, &s).unwrap();
        let lf = log_derivative_fd(k, rho, &s).unwrap();
        prop_assert!((lc - lf).abs() / lc.abs().max(1e-10) < 1e-5, "{lc} {lf}");
    }

    #[test]
    fn incomplete_gamma_bound(a2 in 0u32..10, x in 0.01f64..50.0) {
        let a = a2 as f64 + 0.5;
        prop_assert!(lower_incomplete_gamma(a, x).unwrap() < x.powf(a) / a);
    }

    #[test]
    fn xi_product_is_associative(
        f in prop::collection::vec((0usize..3, prop::collection::vec(0u32..3, 1..4), -5i64..5), 1..5),
        g in prop::collection::vec((0usize..3, prop::collection::vec(0u32..3, 1..4), -5i64..5), 1..5),
        h in prop::collection::vec((0usize..3, prop::collection::vec(0u32..3, 1..4), -5i64..5), 1..5),
    ) {
        let build = |items: &[(usize, Vec<u32>, i64)]| {
            let mut m = XiMap::<f64>::new(4);
            for (q, e, v) in items {
                m.add(*q, e, *v as f64);
            }
            m
        };
        let (f, g, h) = (build(&f), build(&g), build(&h));
        prop_assert_eq!(f.product(&g).product(&h), f.product(&g.product(&h)));
        prop_assert_eq!(f.product(&g), g.product(&f));
    }
}

#[test]
fn regularized_gamma_monotone() {
    for s in [0.5, 1.5, 2.5, 7.5] {
        let mut prev = -1.0;
        for x in log_grid(1e-3, 60.0, 100) {
            let p = regularized_lower_gamma(s, x).unwrap();
            assert!((0.0..=1.0).contains(&p));
            assert!(p > prev || p == 1.0, "s={s} x={x}");
            prev = p;
        }
    }
}

#[test]
fn factorization_at_large_rho() {
    let s = Spectrum::new(vec![0.5, 1.0, 2.0, 1.5]).unwrap();
    let indices = MultiIndex::all_up_to(4, 2);
    let mut prev = f64::INFINITY;
    for rho in [20.0, 40.0, 80.0] {
        let vals = alpha_batch(&indices, rho, &s).unwrap();
        let mut worst: f64 = 0.0;
        for (idx, val) in indices.iter().zip(&vals) {
            let prod: f64 = idx
                .counts()
                .iter()
                .enumerate()
                .map(|(j, &k)| alpha_1d(k, rho, s.get(j)).unwrap().value)
                .product();
            worst = worst.max((val.value - prod).abs());
        }
        assert!(worst < prev, "rho={rho}: {worst}");
        prev = worst;
    }
    assert!(prev < 1e-6);
}

#[test]
fn gamma_nn_weak_range() {
    for l in [vec![1.0, 2.0], vec![1.0, 2.0, 3.0], vec![0.7, 0.2, 1.9, 1.1]] {
        let s = Spectrum::new(l).unwrap();
        for mult in [20.0, 35.0, 60.0] {
            let rho = mult * s.max();
            let p = PointIntegrals::diagonal(rho, &s).unwrap();
            for n in 0..s.dim() {
                let r = (rho / s.get(n)).powi(2) * p.gamma(n, n).value;
                assert!((0.0..=2.05).contains(&r), "{r}");
            }
        }
    }
}

#[test]
fn gamma_nm_decays_faster_than_powers() {
    let s = Spectrum::new(vec![1.0, 2.0, 3.0]).unwrap();
    let rhos = log_grid(10.0 * s.max(), 40.0 * s.max(), 8);
    let logs: Vec<f64> = rhos.iter().map(|&r| PointIntegrals::new(r, &s).unwrap().gamma(0, 1).value.abs().ln()).collect();
    let slopes: Vec<f64> = (1..rhos.len()).map(|i| (logs[i] - logs[i - 1]) / (rhos[i] / rhos[i - 1]).ln()).collect();
    assert!(slopes.windows(2).all(|w| w[1] < w[0]), "{slopes:?}");
    assert!(*slopes.last().unwrap() < -10.0, "{slopes:?}");
}

#[test]
fn eta_routes_agree_for_wide_spectrum() {
    let s = Spectrum::new(vec![0.2, 4.6101653874191815]).unwrap();
    let rho = 9.965169953744308 * s.max();
    let lc = log_derivative_combinatorial(3, rho, &s).unwrap();
    let lf = log_derivative_fd(3, rho, &s).unwrap();
    assert!((lc - 0.13413413437996003).abs() < 1e-12, "{lc}");
    assert!((lc - lf).abs() / lc < 1e-5, "{lc} {lf}");
}
