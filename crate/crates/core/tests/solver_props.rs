mod common;

use common::{feasible_point, random_problem, random_sample, rng};
use proptest::prelude::*;
use qre_core::envelope::{default_big_m, eval_psi, eval_psi_milp};
use qre_core::probe_budget;
use qre_core::problem::{Polyhedron, RobustProblem};
use qre_core::sample::SortedSample;
use qre_core::solver::{solve_gdj, solve_robust, SolveReport};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn instance(r: &mut ChaCha8Rng) -> (SortedSample, RobustProblem) {
    let t = r.gen_range(1..=3);
    let n = r.gen_range(1..=3);
    let j = r.gen_range(1..=12);
    let l = r.gen_range(0.1..3.0);
    let monotone = r.gen_bool(0.5);
    let s = random_sample(r, n, j, l, monotone);
    let rp = random_problem(r, t, n, monotone);
    (s, rp)
}

fn probes_are_ordered(rep: &SolveReport) -> bool {
    rep.probes.iter().all(|a| {
        rep.probes
            .iter()
            .all(|b| a.j > b.j || a.value <= b.value + 1e-9)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn probe_values_grow_with_the_index(seed in any::<u64>()) {
        let (s, rp) = instance(&mut rng(seed));
        let rep = solve_robust(&s, &rp).unwrap();
        prop_assert!(probes_are_ordered(&rep), "{:?}", rep.probes);
    }

    #[test]
    fn probe_count_within_budget(seed in any::<u64>()) {
        let (s, rp) = instance(&mut rng(seed));
        let rep = solve_robust(&s, &rp).unwrap();
        prop_assert!(rep.subproblems() <= probe_budget(s.len()));
        prop_assert_eq!(rep.lp_solves, rep.probes.len());
    }

    #[test]
    fn returned_point_certifies_the_value(seed in any::<u64>()) {
        let (s, rp) = instance(&mut rng(seed));
        let rep = solve_robust(&s, &rp).unwrap();
        prop_assert!(rp.domain.contains(&rep.z, 1e-7));
        prop_assert!((rep.check_value.unwrap() - rep.value).abs() <= 1e-6);
        let j = s.level_index(rep.value).unwrap();
        prop_assert!(solve_gdj(&s, &rp, j).unwrap().value >= rep.value - 1e-6);
    }

    #[test]
    fn failed_probes_are_unreachable(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (s, rp) = instance(&mut r);
        let rep = solve_robust(&s, &rp).unwrap();
        for probe in &rep.probes {
            let top = s.value_at(probe.j);
            let floor = probe.value.max(s.value_at(probe.j + 1));
            if floor < top - 1e-6 {
                let target = 0.5 * (floor + top);
                for _ in 0..100 {
                    let z = feasible_point(&mut r, &rp);
                    let v = eval_psi(&s, &rp.apply(&z)).unwrap().value;
                    prop_assert!(v < target + 1e-6, "z = {:?} reaches {} above probe {:?}", z, v, probe);
                }
            }
        }
    }

    #[test]
    fn shrinking_the_domain_cannot_help(seed in any::<u64>(), shrink in 0.1f64..1.0) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=3);
        let (j, l, monotone) = (r.gen_range(1..=12), r.gen_range(0.1..3.0), r.gen_bool(0.5));
        let s = random_sample(&mut r, n, j, l, monotone);
        let big = RobustProblem::identity(Polyhedron::cube(n, 0.0, 4.0)).unwrap();
        let small = RobustProblem::identity(Polyhedron::cube(n, 0.0, 4.0 * shrink)).unwrap();
        prop_assert!(solve_robust(&s, &small).unwrap().value <= solve_robust(&s, &big).unwrap().value + 1e-7);
    }
}

/// Grid maximum of the disjunctive-program valuation on `[0,1]^t`; with step
/// `h` it is within `L·h/2` of the true maximum.
fn grid_max(s: &SortedSample, t: usize, steps: usize) -> f64 {
    let mut best = f64::NEG_INFINITY;
    let total = (steps + 1).pow(t as u32);
    for idx in 0..total {
        let mut rem = idx;
        let z: Vec<f64> = (0..t)
            .map(|_| {
                let k = rem % (steps + 1);
                rem /= steps + 1;
                k as f64 / steps as f64
            })
            .collect();
        best = best.max(eval_psi_milp(s, &z, default_big_m(s, &z)).unwrap());
    }
    best
}

#[test]
fn matches_a_grid_search() {
    let mut r = rng(77);
    // (dimension, grid steps, largest L) with L·h/2 ≤ 5e-3
    for (t, steps, lmax) in [(1usize, 1000usize, 5.0), (2, 40, 0.4), (3, 16, 0.15)] {
        for _ in 0..3 {
            let (j, l, monotone) = (
                r.gen_range(1..=12),
                r.gen_range(0.05..lmax),
                r.gen_bool(0.5),
            );
            let s = random_sample(&mut r, t, j, l, monotone);
            let rp = RobustProblem::identity(Polyhedron::cube(t, 0.0, 1.0)).unwrap();
            let exact = solve_robust(&s, &rp).unwrap().value;
            let grid = grid_max(&s, t, steps);
            assert!(grid <= exact + 1e-6, "grid {grid} beats {exact}");
            assert!(exact - grid <= 5e-3, "t={t}: grid {grid} vs {exact}");
        }
    }
}
