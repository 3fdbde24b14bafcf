mod common;

use std::time::Instant;

use boxloc::exact::exact_sweep;
use boxloc::gen::{generate, GenConfig};
use boxloc::heuristic::{feasible_swaps, frontier_with_trace, initial_solution, nondominated};
use boxloc::SolveOptions;
use common::property_instances;

#[test]
fn every_incumbent_meets_the_bound_in_force() {
    for (k, inst) in property_instances(60, 7_000).iter().enumerate() {
        let (front, trace) = frontier_with_trace(inst, None).unwrap();
        for (i, it) in trace.iterations.iter().enumerate() {
            assert!(it.coverage_ok, "instance {k} iteration {i}");
            assert!(it.min_access >= it.r - 1e-12, "instance {k} iteration {i}: {} < {}", it.min_access, it.r);
        }
        let pts: Vec<(f64, f64)> = front
            .entries
            .iter()
            .map(|e| (e.solution.total_cost, e.solution.min_access))
            .collect();
        let mut again = nondominated(&pts);
        let mut sorted = pts.clone();
        again.sort_by(|a, b| a.0.total_cmp(&b.0));
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert_eq!(again, sorted, "instance {k}");
    }
}

#[test]
fn heuristic_never_beats_exact() {
    for (k, inst) in property_instances(30, 9_000).iter().enumerate() {
        let (front, _) = frontier_with_trace(inst, None).unwrap();
        let rs: Vec<f64> = front.entries.iter().map(|e| e.solution.min_access).collect();
        for (h, e) in front.entries.iter().zip(exact_sweep(inst, &SolveOptions::default(), &rs)) {
            let e = e.unwrap();
            assert!(h.solution.total_cost >= e.solution.total_cost - 1e-6, "instance {k}");
        }
    }
}

#[test]
fn full_size_scan_is_fast() {
    let inst = generate(&GenConfig::new(1000, 100, 5)).unwrap();
    let start = initial_solution(&inst).unwrap();
    let r = start.min_access;
    let t = Instant::now();
    let swaps = feasible_swaps(&inst, &start.tour, r, inst.q).unwrap();
    let took = t.elapsed();
    assert!(!swaps.is_empty());
    assert!(took.as_secs_f64() < 2.0, "scan took {took:?}");
}
