mod common;

use common::{random_sample, rng};
use proptest::prelude::*;
use qre_core::envelope::eval_psi;
use qre_core::level_function::{
    solve_level_function, solve_level_function_report, LevelFunctionOptions,
};
use qre_core::problem::{Polyhedron, RobustProblem};
use qre_core::solver::solve_robust;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn agrees_with_binary_search(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=2);
        let (j, l, monotone) = (r.gen_range(1..=12), r.gen_range(0.1..3.0), r.gen_bool(0.5));
        let s = random_sample(&mut r, n, j, l, monotone);
        let hi: Vec<f64> = (0..n).map(|_| r.gen_range(0.5..4.0)).collect();
        let domain = Polyhedron::boxed(vec![0.0; n], hi).unwrap();
        let opts = LevelFunctionOptions { eps: 1e-6, max_iter: 500 };
        let lf = solve_level_function(&s, &domain, &opts).unwrap();
        let binary = solve_robust(&s, &RobustProblem::identity(domain.clone()).unwrap()).unwrap();
        prop_assert!(lf.converged);
        prop_assert!((lf.value - binary.value).abs() <= opts.eps + 1e-5, "{} vs {}", lf.value, binary.value);
        prop_assert!(domain.contains(&lf.x, 1e-7));
        prop_assert!((eval_psi(&s, &lf.x).unwrap().value - lf.value).abs() <= 1e-6);
    }

    #[test]
    fn one_disjunctive_solve_per_iteration(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (j, l) = (r.gen_range(1..=12), r.gen_range(0.1..3.0));
        let s = random_sample(&mut r, 2, j, l, false);
        let rep = solve_level_function_report(&s, &Polyhedron::cube(2, 0.0, 4.0), &Default::default()).unwrap();
        prop_assert_eq!(rep.milp_solves, rep.iterations);
        prop_assert_eq!(rep.lp_solves, 0);
        prop_assert_eq!(rep.method.as_str(), "level-function");
    }
}

#[test]
fn gaps_never_increase() {
    let mut r = rng(5);
    for _ in 0..10 {
        let s = random_sample(&mut r, 2, 10, 1.0, false);
        let res =
            solve_level_function(&s, &Polyhedron::cube(2, 0.0, 4.0), &Default::default()).unwrap();
        // each cut shrinks the feasible region of the cut LP
        assert!(
            res.state.gaps.windows(2).all(|w| w[1] <= w[0] + 1e-9),
            "{:?}",
            res.state.gaps
        );
    }
}

#[test]
fn iteration_cap_is_reported() {
    let mut r = rng(9);
    let s = random_sample(&mut r, 2, 12, 1.0, false);
    let opts = LevelFunctionOptions {
        eps: 0.0,
        max_iter: 1,
    };
    let res = solve_level_function(&s, &Polyhedron::cube(2, 0.0, 4.0), &opts).unwrap();
    assert_eq!(res.iterations, 1);
    if res.state.gaps[0] > 0.0 {
        assert!(!res.converged);
    }
}
