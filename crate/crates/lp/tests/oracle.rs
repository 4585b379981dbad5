use proptest::prelude::*;
use qre_lp::{solve_lp, solve_milp, LinearProgram, LpStatus, MixedBinaryProgram, Sense};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Solve a small dense square system; `None` when (near) singular.
#[allow(clippy::needless_range_loop)]
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-9 {
            return None;
        }
        a.swap(p, c);
        b.swap(p, c);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Best objective over all basic feasible points of a bounded program.
fn vertex_oracle(lp: &LinearProgram) -> Option<f64> {
    let n = lp.num_vars();
    // Each candidate hyperplane is (row, rhs, must_be_active).
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for (r, b) in lp.ineq_rows.iter().zip(&lp.ineq_rhs) {
        planes.push((r.clone(), *b));
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), lp.lower[j]));
        planes.push((e, lp.upper[j]));
    }
    let eqs: Vec<(Vec<f64>, f64)> = lp
        .eq_rows
        .iter()
        .cloned()
        .zip(lp.eq_rhs.iter().copied())
        .collect();
    let free = n - eqs.len();
    let mut best: Option<f64> = None;
    for combo in combinations(planes.len(), free) {
        let mut a: Vec<Vec<f64>> = eqs.iter().map(|e| e.0.clone()).collect();
        let mut b: Vec<f64> = eqs.iter().map(|e| e.1).collect();
        for &i in &combo {
            a.push(planes[i].0.clone());
            b.push(planes[i].1);
        }
        let Some(x) = solve_square(a, b) else {
            continue;
        };
        if lp.max_violation(&x) > 1e-7 {
            continue;
        }
        let v = lp.objective_value(&x);
        best = Some(match (best, lp.sense) {
            (None, _) => v,
            (Some(b), Sense::Minimize) => b.min(v),
            (Some(b), Sense::Maximize) => b.max(v),
        });
    }
    best
}

fn random_bounded_lp(seed: u64) -> LinearProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=6);
    let m = rng.gen_range(0..=if n > 4 { 2 } else { 4 });
    let cost: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
    let mut lp = if rng.gen_bool(0.5) {
        LinearProgram::minimize(cost)
    } else {
        LinearProgram::maximize(cost)
    };
    for j in 0..n {
        let lo = rng.gen_range(-3.0..1.0);
        lp.set_bounds(j, lo, lo + rng.gen_range(0.5..4.0));
    }
    for _ in 0..m {
        let row: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let rhs = rng.gen_range(-2.0..4.0);
        if rng.gen_bool(0.3) {
            lp.add_ge(row, rhs);
        } else {
            lp.add_le(row, rhs);
        }
    }
    if n >= 2 && rng.gen_bool(0.25) {
        let row: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        lp.add_eq(row, rng.gen_range(-1.0..1.0));
    }
    lp
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn matches_vertex_enumeration(seed in any::<u64>()) {
        let lp = random_bounded_lp(seed);
        let sol = solve_lp(&lp).unwrap();
        match vertex_oracle(&lp) {
            None => prop_assert_eq!(sol.status, LpStatus::Infeasible),
            Some(v) => {
                prop_assert_eq!(sol.status, LpStatus::Optimal);
                prop_assert!((sol.value - v).abs() <= 1e-6, "simplex {} vs oracle {}", sol.value, v);
                prop_assert!(lp.max_violation(&sol.x) <= 1e-7);
                prop_assert!((sol.value - lp.objective_value(&sol.x)).abs() <= 1e-9 * (1.0 + sol.value.abs()));
            }
        }
    }

    #[test]
    fn zero_binaries_match_plain_lp(seed in any::<u64>()) {
        let lp = random_bounded_lp(seed);
        let a = solve_lp(&lp).unwrap();
        let b = solve_milp(&MixedBinaryProgram::new(lp, Vec::new())).unwrap();
        prop_assert_eq!(a.status, b.status);
        if a.is_optimal() {
            prop_assert_eq!(a.value.to_bits(), b.value.to_bits());
            prop_assert_eq!(&a.x, &b.x);
        }
    }

    #[test]
    fn solves_are_deterministic(seed in any::<u64>()) {
        let lp = random_bounded_lp(seed);
        let a = solve_lp(&lp).unwrap();
        let b = solve_lp(&lp).unwrap();
        prop_assert_eq!(a.status, b.status);
        prop_assert_eq!(a.iterations, b.iterations);
        prop_assert_eq!(format!("{:?}", a.x), format!("{:?}", b.x));
    }

    #[test]
    fn milp_matches_binary_enumeration(seed in any::<u64>()) {
        let mut lp = random_bounded_lp(seed);
        let nb = lp.num_vars().min(3);
        let binaries: Vec<usize> = (0..nb).collect();
        for &j in &binaries {
            lp.set_bounds(j, 0.0, 1.0);
        }
        let mbp = MixedBinaryProgram::new(lp.clone(), binaries.clone());
        let sol = solve_milp(&mbp).unwrap();

        let mut best: Option<f64> = None;
        for mask in 0..(1u32 << nb) {
            let mut fixed = lp.clone();
            for (k, &j) in binaries.iter().enumerate() {
                let v = f64::from((mask >> k) & 1);
                fixed.set_bounds(j, v, v);
            }
            let s = solve_lp(&fixed).unwrap();
            if s.is_optimal() {
                best = Some(match (best, lp.sense) {
                    (None, _) => s.value,
                    (Some(b), Sense::Minimize) => b.min(s.value),
                    (Some(b), Sense::Maximize) => b.max(s.value),
                });
            }
        }
        match best {
            None => prop_assert_eq!(sol.status, LpStatus::Infeasible),
            Some(v) => {
                prop_assert_eq!(sol.status, LpStatus::Optimal);
                prop_assert!((sol.value - v).abs() <= 1e-6 * (1.0 + v.abs()));
                for &j in &binaries {
                    prop_assert!(sol.x[j] == 0.0 || sol.x[j] == 1.0);
                }
            }
        }
    }
}
