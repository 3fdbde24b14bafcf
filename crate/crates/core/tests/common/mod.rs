//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use boxloc::gen::{generate, GenConfig};
use boxloc::Instance;

/// Shortest closed walk from `stops[0]` through every stop, by Held–Karp.
/// One stop costs nothing; two stops use their edge twice.
pub fn held_karp(inst: &Instance, stops: &[usize]) -> f64 {
    let k = stops.len();
    let c = |a: usize, b: usize| inst.edge_costs.get(stops[a], stops[b]);
    match k {
        0 | 1 => return 0.0,
        2 => return 2.0 * c(0, 1),
        _ => {}
    }
    let m = k - 1;
    let full = 1usize << m;
    let mut dp = vec![f64::INFINITY; full * m];
    for j in 0..m {
        dp[(1 << j) * m + j] = c(0, j + 1);
    }
    for mask in 1..full {
        for j in 0..m {
            let cur = dp[mask * m + j];
            if mask & (1 << j) == 0 || !cur.is_finite() {
                continue;
            }
            for nxt in 0..m {
                if mask & (1 << nxt) != 0 {
                    continue;
                }
                let slot = &mut dp[(mask | (1 << nxt)) * m + nxt];
                *slot = slot.min(cur + c(j + 1, nxt + 1));
            }
        }
    }
    (0..m)
        .map(|j| dp[(full - 1) * m + j] + c(j + 1, 0))
        .fold(f64::INFINITY, f64::min)
}

/// Access of every population, computed straight from the parameters.
pub fn accesses(inst: &Instance, chosen: &[usize]) -> Vec<f64> {
    inst.populations
        .iter()
        .map(|p| {
            let s: f64 = chosen.iter().map(|&j| p.access.a[&inst.locations[j].id]).sum();
            (p.access.v1 + s) / (p.access.v0 + p.access.v1 + s)
        })
        .collect()
}

/// Cheapest total cost over every selection containing the required
/// locations that covers each population `q` times and gives each at least
/// `r` access. `None` when nothing qualifies.
pub fn brute_force(inst: &Instance, r: f64) -> Option<f64> {
    let n = inst.locations.len();
    let start = inst.location_index(&inst.start).unwrap();
    let required: usize = (0..n).filter(|&j| inst.locations[j].required).map(|j| 1 << j).sum();
    let mut best: Option<f64> = None;
    for mask in 0usize..1 << n {
        if mask & required != required {
            continue;
        }
        let mut chosen = vec![start];
        chosen.extend((0..n).filter(|&j| j != start && mask & (1 << j) != 0));
        let covered = inst.populations.iter().all(|p| {
            let hits = p
                .covering_set
                .iter()
                .filter(|id| chosen.iter().any(|&j| &inst.locations[j].id == *id))
                .count();
            hits >= inst.q as usize
        });
        if !covered || accesses(inst, &chosen).iter().any(|&a| a < r - 1e-9) {
            continue;
        }
        let fixed: f64 = chosen.iter().map(|&j| inst.locations[j].fixed_cost).sum();
        let total = fixed + held_karp(inst, &chosen);
        if best.is_none_or(|b| total < b) {
            best = Some(total);
        }
    }
    best
}

/// Lowest access any population has with only the required locations.
pub fn required_access(inst: &Instance) -> f64 {
    let req: Vec<usize> = (0..inst.locations.len()).filter(|&j| inst.locations[j].required).collect();
    accesses(inst, &req).into_iter().fold(1.0, f64::min)
}

pub struct Case {
    pub inst: Instance,
    pub r: f64,
    pub label: String,
}

/// Fifty small generated instances with 5–9 locations, 5–25 populations,
/// q cycling through 0, 1, 2 and r alternating between zero and the middle
/// of the achievable range.
pub fn oracle_suite() -> Vec<Case> {
    (0..50u64)
        .map(|k| {
            let n = 5 + (k % 5) as usize;
            let w = 5 + ((k * 7) % 21) as usize;
            let mut cfg = GenConfig::new(w, n, 1000 + k);
            cfg.q = (k % 3) as u32;
            let inst = generate(&cfg).unwrap();
            let r = if k % 2 == 0 {
                0.0
            } else {
                0.5 * (required_access(&inst) + inst.max_min_access())
            };
            Case {
                label: format!("seed {} n={n} w={w} q={} r={r:.4}", 1000 + k, cfg.q),
                inst,
                r,
            }
        })
        .collect()
}

/// Random instances for the broad property checks: 4–14 locations, 5–60
/// populations, q cycling through 0, 1, 2.
pub fn property_instances(count: u64, base_seed: u64) -> Vec<Instance> {
    (0..count)
        .map(|k| {
            let n = 4 + (k % 11) as usize;
            let w = 5 + ((k * 13) % 56) as usize;
            let mut cfg = GenConfig::new(w, n, base_seed + k);
            cfg.q = (k % 3) as u32;
            generate(&cfg).unwrap()
        })
        .collect()
}
