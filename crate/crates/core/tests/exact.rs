mod common;

use boxloc::exact::{solve_exact, solve_exact_with, validate_solution};
use boxloc::gen::{generate, GenConfig};
use boxloc::{dominance_filter, SolveOptions};
use common::{brute_force, oracle_suite, required_access};

#[test]
fn filter_is_sound_on_small_instances() {
    let mut removed = 0;
    for k in 0..100u64 {
        let n = 4 + (k % 5) as usize;
        let mut cfg = GenConfig::new(5 + (k % 20) as usize, n, 300 + k);
        cfg.q = (k % 3) as u32;
        let inst = generate(&cfg).unwrap();
        let r = 0.5 * (required_access(&inst) + inst.max_min_access());
        let plain = solve_exact(&inst, &SolveOptions::with_r(r)).unwrap();
        let filtered = solve_exact(
            &inst,
            &SolveOptions {
                dominance_filter: true,
                ..SolveOptions::with_r(r)
            },
        )
        .unwrap();
        assert!((plain.total_cost - filtered.total_cost).abs() < 1e-6, "seed {}", 300 + k);
        assert!(validate_solution(&inst, &SolveOptions::with_r(r), &filtered).is_empty());
        removed += dominance_filter(&inst).unwrap().len();
    }
    assert!(removed > 0, "the suite should exercise the filter at least once");
}

#[test]
fn integral_only_separation_agrees_with_default() {
    for case in oracle_suite().into_iter().take(20) {
        let opts = SolveOptions::with_r(case.r);
        let a = solve_exact(&case.inst, &opts).unwrap();
        let b = solve_exact_with(&case.inst, &opts, false).unwrap();
        assert!((a.total_cost - b.total_cost).abs() < 1e-6, "{}", case.label);
    }
}

#[test]
fn fixed_count_and_tour_cap_are_respected() {
    for case in oracle_suite().into_iter().step_by(3) {
        let n = case.inst.locations.len();
        let unconstrained = solve_exact(&case.inst, &SolveOptions::default()).unwrap();
        for k in [unconstrained.selected.len(), n] {
            let opts = SolveOptions {
                fixed_count: Some(k),
                ..Default::default()
            };
            let sol = solve_exact(&case.inst, &opts).unwrap();
            assert_eq!(sol.selected.len(), k, "{}", case.label);
            assert!(validate_solution(&case.inst, &opts, &sol).is_empty());
        }
        let everything = solve_exact(
            &case.inst,
            &SolveOptions {
                fixed_count: Some(n),
                ..Default::default()
            },
        )
        .unwrap();
        let cap = 0.5 * (unconstrained.operational_cost + everything.operational_cost);
        let opts = SolveOptions {
            tour_cost_cap: Some(cap),
            ..Default::default()
        };
        if let Ok(sol) = solve_exact(&case.inst, &opts) {
            assert!(sol.operational_cost <= cap + 1e-6, "{}", case.label);
            assert!(validate_solution(&case.inst, &opts, &sol).is_empty());
        }
    }
}

#[test]
fn budget_equal_to_optimum_is_feasible_and_below_is_not() {
    for case in oracle_suite().into_iter().take(10) {
        let best = brute_force(&case.inst, case.r).unwrap();
        let at = SolveOptions {
            budget: Some(best + 1e-7),
            ..SolveOptions::with_r(case.r)
        };
        assert!(solve_exact(&case.inst, &at).is_ok(), "{}", case.label);
        let below = SolveOptions {
            budget: Some(best - 1.0),
            ..SolveOptions::with_r(case.r)
        };
        assert!(solve_exact(&case.inst, &below).is_err(), "{}", case.label);
    }
}
