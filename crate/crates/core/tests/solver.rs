mod common;

use mazepi::solver::{
    self, greedy_policy, policy_evaluation, policy_evaluation_exact, policy_improvement, policy_iteration_with,
    value_iteration, Policy, SolverConfig,
};
use mazepi::{Action, Maze, RewardParams};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn iterative_matches_linear_solve(seed in 0u64..100_000) {
        let m = common::random_maze(8, 8, seed);
        let p = common::random_params(seed ^ 0xabc);
        let pi = common::proper_policy(&m, seed);
        let theta = 1e-7;
        let (v, _) = policy_evaluation(&m, &p, &pi, theta).unwrap();
        let exact = policy_evaluation_exact(&m, &p, &pi).unwrap();
        // Gauss-Seidel stops with error at most theta * gamma / (1 - gamma)
        let bound = theta * p.gamma / (1.0 - p.gamma) + 1e-9;
        prop_assert!(v.max_gap(&exact, &m) <= bound, "gap {} bound {}", v.max_gap(&exact, &m), bound);
    }

    #[test]
    fn improvement_never_hurts(seed in 0u64..100_000) {
        let m = common::random_maze(6, 6, seed);
        let p = common::random_params(seed);
        let mut pi = Policy::random(&m, &mut mazepi::config::rng(seed));
        for _ in 0..20 {
            let v = policy_evaluation_exact(&m, &p, &pi).unwrap();
            let (next, stable) = policy_improvement(&m, &p, &v, &pi).unwrap();
            let v2 = policy_evaluation_exact(&m, &p, &next).unwrap();
            for s in m.states() {
                prop_assert!(v2.get(s) >= v.get(s) - 1e-9);
            }
            if stable {
                prop_assert_eq!(&next, &pi);
                break;
            }
            pi = next;
        }
    }

    #[test]
    fn rounds_bounded_by_policy_count(seed in 0u64..100_000) {
        let m = common::tiny_maze(seed, 5);
        let p = common::random_params(seed);
        let n = m.traversable_count() - 1;
        let sol = solver::solve(&m, &p, 1e-9).unwrap();
        prop_assert!(sol.stats.improvement_rounds <= 4usize.pow(n as u32));
        prop_assert!(sol.stats.improvement_rounds >= 1);
    }

    #[test]
    fn policy_iteration_matches_value_iteration(seed in 0u64..100_000) {
        let m = common::random_maze(9, 7, seed);
        let p = common::random_params(seed);
        let sol = solver::solve(&m, &p, 1e-10).unwrap();
        let (vstar, _) = value_iteration(&m, &p, 1e-11).unwrap();
        let pi_v = policy_evaluation_exact(&m, &p, &sol.policy).unwrap();
        let g = greedy_policy(&m, &p, &vstar).unwrap();
        let g_v = policy_evaluation_exact(&m, &p, &g).unwrap();
        prop_assert!(pi_v.max_gap(&g_v, &m) < 1e-6);
    }
}

#[test]
fn enumeration_on_two_by_three() {
    let m = Maze::parse("S.B\n.OG").unwrap();
    assert_eq!(common::all_policies(&m).len(), 4usize.pow(5));
    for seed in 0..10 {
        let p = common::random_params(seed);
        let best = common::enumerated_optimum(&m, &p);
        let sol = solver::solve(&m, &p, 1e-12).unwrap();
        assert!((sol.values.get(m.start()) - best).abs() < 1e-8, "seed {seed}");
    }
}

#[test]
fn history_starts_at_init_and_ends_at_result() {
    let m = common::random_maze(10, 10, 4);
    let p = RewardParams::default();
    let init = Policy::uniform(&m, Action::West);
    let mut history = Vec::new();
    let sol = policy_iteration_with(&m, &p, &init, &SolverConfig::with_theta(1e-8), Some(&mut history)).unwrap();
    assert_eq!(history.first(), Some(&init));
    assert_eq!(history.last(), Some(&sol.policy));
    assert_eq!(history.len(), sol.stats.improvement_rounds + 1);
}

#[test]
fn repeated_solves_are_identical() {
    let m = common::random_maze(15, 15, 9);
    let p = common::random_params(9);
    let a = solver::solve(&m, &p, 1e-6).unwrap();
    let b = solver::solve(&m, &p, 1e-6).unwrap();
    assert_eq!(a.values.to_csv(&m), b.values.to_csv(&m));
    assert_eq!(a.policy, b.policy);
    assert_eq!(a.stats.summary(), b.stats.summary());
}
