use proptest::prelude::*;
use qre_bench::baselines::{fit_concave_regression, fit_piecewise_constant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn data(seed: u64, j: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec<f64>> = (0..j)
        .map(|_| vec![r.gen_range(0.0..4.0), r.gen_range(0.0..4.0)])
        .collect();
    let values = points
        .iter()
        .map(|p| (p[0] * p[1]).sqrt() - 0.1 * p[0] * p[0])
        .collect();
    (points, values)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn constant_fit_is_exact_at_the_best_point(seed in any::<u64>(), j in 1usize..20) {
        let (points, values) = data(seed, j);
        let pc = fit_piecewise_constant(&points, &values).unwrap();
        let (x, v) = pc.maximize();
        let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(v, best);
        prop_assert_eq!(pc.eval(&x).unwrap(), best);
    }

    #[test]
    fn constant_fit_covers_data_and_midpoints(seed in any::<u64>(), j in 2usize..20, a in 0usize..20, b in 0usize..20) {
        let (points, values) = data(seed, j);
        let (a, b) = (a % j, b % j);
        let pc = fit_piecewise_constant(&points, &values).unwrap();
        prop_assert!(pc.eval(&points[a]).unwrap() >= values[a]);
        let mid: Vec<f64> = points[a].iter().zip(&points[b]).map(|(p, q)| 0.5 * (p + q)).collect();
        prop_assert!(pc.eval(&mid).unwrap() >= values[a].min(values[b]) - 1e-12);
    }

    #[test]
    fn constant_fit_is_quasiconcave(seed in any::<u64>(), j in 3usize..20, a in 0usize..20, b in 0usize..20, t in 0.0f64..=1.0) {
        let (points, values) = data(seed, j);
        let pc = fit_piecewise_constant(&points, &values).unwrap();
        let (x, y) = (&points[a % j], &points[b % j]);
        let mix: Vec<f64> = x.iter().zip(y).map(|(p, q)| t * p + (1.0 - t) * q).collect();
        let lower = pc.eval(x).unwrap().min(pc.eval(y).unwrap());
        prop_assert!(pc.eval(&mix).unwrap() >= lower - 1e-12);
    }

    #[test]
    fn regression_is_concave(seed in any::<u64>(), k in 1usize..=4) {
        let (points, values) = data(seed, 40);
        let fit = fit_concave_regression(&points, &values, k).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(seed ^ 1);
        for _ in 0..100 {
            let x = [r.gen_range(-1.0..5.0), r.gen_range(-1.0..5.0)];
            let y = [r.gen_range(-1.0..5.0), r.gen_range(-1.0..5.0)];
            let mid = [0.5 * (x[0] + y[0]), 0.5 * (x[1] + y[1])];
            prop_assert!(fit.eval(&mid) >= 0.5 * (fit.eval(&x) + fit.eval(&y)) - 1e-9);
        }
    }

    #[test]
    fn regression_maximizer_beats_the_box(seed in any::<u64>(), k in 1usize..=4) {
        let (points, values) = data(seed, 40);
        let fit = fit_concave_regression(&points, &values, k).unwrap();
        let (z, v) = fit.maximize(&[0.0, 0.0], &[4.0, 4.0]).unwrap();
        prop_assert!((fit.eval(&z) - v).abs() <= 1e-7);
        let mut r = ChaCha8Rng::seed_from_u64(seed ^ 2);
        for _ in 0..50 {
            let x = [r.gen_range(0.0..4.0), r.gen_range(0.0..4.0)];
            prop_assert!(fit.eval(&x) <= v + 1e-7);
        }
    }
}

#[test]
fn outside_the_hull_is_minus_infinity() {
    let points = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
    let pc = fit_piecewise_constant(&points, &[3.0, 2.0, 1.0]).unwrap();
    assert_eq!(pc.eval(&[1.0, 1.0]).unwrap(), f64::NEG_INFINITY);
    assert_eq!(pc.eval(&[0.0, 0.0]).unwrap(), 3.0);
    assert_eq!(pc.eval(&[0.5, 0.0]).unwrap(), 2.0);
    assert_eq!(pc.eval(&[0.2, 0.2]).unwrap(), 1.0);
}
