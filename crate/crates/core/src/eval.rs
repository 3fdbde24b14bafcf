//! Scoring of a single solution and comparison of two frontiers.

use serde::{Deserialize, Serialize};

use crate::heuristic::{Frontier, FrontierEntry};
use crate::model::{DblpError, Instance, Solution};

/// Per-mode travel times from populations to locations, used for the
/// non-driving coverage criterion. Matrices are `[population][location]` in
/// instance order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeDurations {
    /// A location covers a population without a car when walking or transit
    /// reaches it within this many minutes.
    pub threshold: f64,
    /// Share of each population's voters with a vehicle.
    pub vehicle_fraction: Vec<f64>,
    pub walk: Vec<Vec<f64>>,
    pub transit: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriteriaReport {
    pub num_boxes: usize,
    pub fixed_cost: f64,
    pub operational_cost: f64,
    pub total_cost: f64,
    pub frac_covered_1: f64,
    pub frac_covered_q: f64,
    /// Among voters without a car, weighted share with `q` boxes reachable
    /// on foot or by transit. Present only with [`ModeDurations`].
    pub frac_nondriving_q: Option<f64>,
    pub min_access: f64,
    pub avg_access: f64,
    pub max_dist_closest: Option<f64>,
    /// Worst distance to the third closest box (the farthest box when fewer
    /// than three are open).
    pub max_dist_third_closest: Option<f64>,
    pub avg_dist_closest: Option<f64>,
    pub avg_dist_closest3: Option<f64>,
}

impl CriteriaReport {
    /// `(label, value)` rows; distance and non-driving rows only when known.
    pub fn rows(&self) -> Vec<(&'static str, f64)> {
        let mut rows = vec![
            ("num_boxes", self.num_boxes as f64),
            ("fixed_cost", self.fixed_cost),
            ("operational_cost", self.operational_cost),
            ("total_cost", self.total_cost),
            ("frac_covered_1", self.frac_covered_1),
            ("frac_covered_q", self.frac_covered_q),
        ];
        if let Some(v) = self.frac_nondriving_q {
            rows.push(("frac_nondriving_q", v));
        }
        rows.push(("min_access", self.min_access));
        rows.push(("avg_access", self.avg_access));
        for (label, v) in [
            ("max_dist_closest", self.max_dist_closest),
            ("max_dist_third_closest", self.max_dist_third_closest),
            ("avg_dist_closest", self.avg_dist_closest),
            ("avg_dist_closest3", self.avg_dist_closest3),
        ] {
            if let Some(v) = v {
                rows.push((label, v));
            }
        }
        rows
    }
}

fn weighted_mean(pairs: impl Iterator<Item = (f64, f64)>) -> f64 {
    let (num, den) = pairs.fold((0.0, 0.0), |(n, d), (w, v)| (n + w * v, d + w));
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Scores `sol` on `inst`. `distances` is a `[population][location]` matrix;
/// `modes` enables the non-driving coverage fraction.
pub fn criteria(
    inst: &Instance,
    sol: &Solution,
    distances: Option<&[Vec<f64>]>,
    modes: Option<&ModeDurations>,
) -> Result<CriteriaReport, DblpError> {
    let ix = inst.indexed()?;
    let selected: Vec<usize> = sol.selected.iter().map(|id| ix.index(id)).collect::<Result<_, _>>()?;
    let q = inst.q as usize;
    let weights: Vec<f64> = inst.populations.iter().map(|p| p.weight).collect();

    let coverage: Vec<usize> = ix.pops.iter().map(|p| p.coverage_of(&selected)).collect();
    let frac = |k: usize| {
        weighted_mean(
            weights
                .iter()
                .zip(&coverage)
                .map(|(&w, &c)| (w, if c >= k { 1.0 } else { 0.0 })),
        )
    };
    let access: Vec<f64> = ix.pops.iter().map(|p| p.access_of(&selected)).collect();
    let min_access = access.iter().copied().fold(f64::INFINITY, f64::min);

    let nearest: Option<Vec<Vec<f64>>> = distances.map(|d| {
        d.iter()
            .map(|row| {
                let mut v: Vec<f64> = selected.iter().map(|&j| row[j]).collect();
                v.sort_by(f64::total_cmp);
                v
            })
            .collect()
    });
    let dist_field = |f: &dyn Fn(&[f64]) -> f64, avg: bool| {
        nearest.as_ref().filter(|_| !selected.is_empty()).map(|rows| {
            if avg {
                weighted_mean(weights.iter().zip(rows).map(|(&w, r)| (w, f(r))))
            } else {
                rows.iter().map(|r| f(r)).fold(f64::NEG_INFINITY, f64::max)
            }
        })
    };
    let closest = |r: &[f64]| r[0];
    let third = |r: &[f64]| r[r.len().min(3) - 1];
    let mean3 = |r: &[f64]| {
        let k = r.len().min(3);
        r[..k].iter().sum::<f64>() / k as f64
    };

    let frac_nondriving_q = modes.map(|m| {
        weighted_mean(inst.populations.iter().enumerate().map(|(w, p)| {
            let reach = selected
                .iter()
                .filter(|&&j| m.walk[w][j] <= m.threshold || m.transit[w][j] <= m.threshold)
                .count();
            let carless = p.weight * (1.0 - m.vehicle_fraction[w]);
            (carless, if reach >= q { 1.0 } else { 0.0 })
        }))
    });

    Ok(CriteriaReport {
        num_boxes: selected.len(),
        fixed_cost: sol.fixed_cost,
        operational_cost: sol.operational_cost,
        total_cost: sol.total_cost,
        frac_covered_1: frac(1),
        frac_covered_q: frac(q),
        frac_nondriving_q,
        min_access: if min_access.is_finite() { min_access } else { 1.0 },
        avg_access: weighted_mean(weights.iter().copied().zip(access.iter().copied())),
        max_dist_closest: dist_field(&closest, false),
        max_dist_third_closest: dist_field(&third, false),
        avg_dist_closest: dist_field(&closest, true),
        avg_dist_closest3: dist_field(&mean3, true),
    })
}

/// Heuristic against exact cost at one bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationPair {
    pub r: f64,
    pub heuristic_cost: f64,
    pub exact_cost: f64,
}

impl DeviationPair {
    pub fn percent(&self) -> f64 {
        (self.heuristic_cost - self.exact_cost) / self.exact_cost * 100.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub pairs: Vec<DeviationPair>,
    /// `None` when no bound was solved by both methods.
    pub mean_percent_deviation: Option<f64>,
    pub heuristic_seconds: f64,
    pub exact_seconds: f64,
    pub heuristic_solutions: usize,
    pub exact_solutions: usize,
}

/// Matches every heuristic entry with the exact entry solved at its minimum
/// access (`r_satisfied` equal to it) and averages the percent differences.
/// Timings are left at zero for the caller to fill in.
pub fn cost_deviation(exact: &[FrontierEntry], heuristic: &Frontier) -> DeviationReport {
    let pairs: Vec<DeviationPair> = heuristic
        .entries
        .iter()
        .filter_map(|h| {
            let r = h.solution.min_access;
            exact.iter().find(|e| e.r_satisfied == r).map(|e| DeviationPair {
                r,
                heuristic_cost: h.solution.total_cost,
                exact_cost: e.solution.total_cost,
            })
        })
        .collect();
    let mean_percent_deviation =
        (!pairs.is_empty()).then(|| pairs.iter().map(DeviationPair::percent).sum::<f64>() / pairs.len() as f64);
    DeviationReport {
        mean_percent_deviation,
        heuristic_seconds: 0.0,
        exact_seconds: 0.0,
        heuristic_solutions: heuristic.entries.len(),
        exact_solutions: exact.len(),
        pairs,
    }
}
