//! Synthetic instances on a 100 × 100 grid, access parameters from travel
//! durations, and the single-box marginal access table.
//!
//! # Random stream
//!
//! Instances are drawn from `ChaCha8Rng::seed_from_u64(seed)` (rand_chacha
//! 0.3). Every uniform real is `(next_u64 >> 11) · 2⁻⁵³` scaled to its range,
//! every uniform integer in `[lo, hi]` is `lo + next_u64 mod (hi − lo + 1)`.
//! Draws happen in this order:
//!
//! 1. location coordinates, `x` then `y`, for each location;
//! 2. population coordinates, `x` then `y`, for each population;
//! 3. the number of required locations, then a partial Fisher–Yates shuffle
//!    of the location indices (one integer per pick); the first pick is the
//!    start;
//! 4. one fixed cost per location;
//! 5. the operational cost scale;
//! 6. the covering threshold;
//! 7. one `v1` per population.

use std::collections::BTreeMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{
    annualize_operational, edge_cost_from_travel, AccessParams, DblpError, EdgeCosts, Instance, Location,
    VoterPopulation,
};

pub const RNG_NAME: &str = "ChaCha8Rng/seed_from_u64";

/// Travel assumptions used to turn grid distance into yearly tour cost.
pub const SPEED_MPH: f64 = 30.0;
pub const HOURLY_RATE: f64 = 40.0;
pub const TEAM_SIZE: u32 = 2;
pub const MILEAGE_RATE: f64 = 0.56;
pub const COLLECTIONS_PER_YEAR: f64 = 50.0;
pub const COST_GROWTH: f64 = 0.02;
pub const LIFETIME_YEARS: u32 = 15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub num_populations: usize,
    pub num_locations: usize,
    pub seed: u64,
    pub q: u32,
    pub grid: f64,
    pub fixed_cost_range: (f64, f64),
    pub op_scale_range: (f64, f64),
    pub threshold_range: (f64, f64),
    pub v1_range: (f64, f64),
    pub expansion: ThresholdExpansion,
}

/// How the covering threshold grows when a population would otherwise see
/// fewer than `max(q, 2)` locations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdExpansion {
    /// Only the short population's own threshold grows, to its
    /// `max(q, 2)`-th nearest location.
    #[default]
    PerPopulation,
    /// One threshold for everyone: the smallest that gives every population
    /// enough locations.
    Global,
}

impl GenConfig {
    pub fn new(num_populations: usize, num_locations: usize, seed: u64) -> Self {
        GenConfig {
            num_populations,
            num_locations,
            seed,
            q: 2,
            grid: 100.0,
            fixed_cost_range: (5000.0, 12000.0),
            op_scale_range: (0.5, 1.5),
            threshold_range: (15.0, 50.0),
            v1_range: (50.0, 95.0),
            expansion: ThresholdExpansion::PerPopulation,
        }
    }
}

struct Stream(ChaCha8Rng);

impl Stream {
    fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn uniform(&mut self, (lo, hi): (f64, f64)) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    fn int(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.0.next_u64() % (hi - lo + 1) as u64) as usize
    }
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

fn manhattan(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs() + (a.1 - b.1).abs()
}

/// Yearly cost of traversing `miles` of grid distance once per collection.
pub fn yearly_edge_cost(miles: f64) -> f64 {
    let minutes = miles / SPEED_MPH * 60.0;
    let per_tour = edge_cost_from_travel(minutes, SPEED_MPH, HOURLY_RATE, TEAM_SIZE, MILEAGE_RATE);
    annualize_operational(per_tour, COLLECTIONS_PER_YEAR, COST_GROWTH, LIFETIME_YEARS)
}

/// Benefit of a box at grid distance `d`; distances below one unit count as one.
pub fn distance_benefit(d: f64) -> f64 {
    (2.5 - d.max(1.0) / 30.0).exp()
}

/// Draws an instance from `cfg`; the same configuration always yields the
/// same instance.
pub fn generate(cfg: &GenConfig) -> Result<Instance, DblpError> {
    generate_with_coords(cfg).map(|(inst, _)| inst)
}

/// Like [`generate`], also returning each population's grid position.
pub fn generate_with_coords(cfg: &GenConfig) -> Result<(Instance, Vec<(f64, f64)>), DblpError> {
    let n = cfg.num_locations;
    if n < 4 {
        return Err(DblpError::InvalidArgument(format!("need at least 4 locations, got {n}")));
    }
    if cfg.q as usize > n {
        return Err(DblpError::InvalidArgument(format!("q = {} exceeds {n} locations", cfg.q)));
    }
    let mut rng = Stream(ChaCha8Rng::seed_from_u64(cfg.seed));
    let range = (0.0, cfg.grid);
    let loc_xy: Vec<(f64, f64)> = (0..n).map(|_| (rng.uniform(range), rng.uniform(range))).collect();
    let pop_xy: Vec<(f64, f64)> = (0..cfg.num_populations)
        .map(|_| (rng.uniform(range), rng.uniform(range)))
        .collect();

    let num_required = rng.int(1, n.div_ceil(4));
    let mut order: Vec<usize> = (0..n).collect();
    for k in 0..num_required {
        let pick = rng.int(k, n - 1);
        order.swap(k, pick);
    }
    let mut required = vec![false; n];
    for &j in &order[..num_required] {
        required[j] = true;
    }
    let start = order[0];

    let fixed: Vec<f64> = (0..n).map(|_| round4(rng.uniform(cfg.fixed_cost_range))).collect();
    let scale = rng.uniform(cfg.op_scale_range);
    let threshold = rng.uniform(cfg.threshold_range);

    let ids: Vec<String> = (0..n).map(|j| format!("n{j}")).collect();
    let locations: Vec<Location> = (0..n)
        .map(|j| Location {
            id: ids[j].clone(),
            fixed_cost: fixed[j],
            coords: Some(loc_xy[j]),
            required: required[j],
        })
        .collect();
    let edge_costs = EdgeCosts::from_fn(n, |i, j| {
        round4(yearly_edge_cost(manhattan(loc_xy[i], loc_xy[j])) * scale)
    });

    let need = (cfg.q as usize).max(2);
    let dist: Vec<Vec<f64>> = pop_xy
        .iter()
        .map(|&p| loc_xy.iter().map(|&l| manhattan(p, l)).collect())
        .collect();
    let kth_nearest: Vec<f64> = dist
        .iter()
        .map(|d| {
            let mut sorted = d.clone();
            sorted.sort_by(f64::total_cmp);
            sorted[need - 1]
        })
        .collect();
    let global = kth_nearest.iter().copied().fold(threshold, f64::max);
    let populations = dist
        .iter()
        .enumerate()
        .map(|(w, dist)| {
            let v1 = rng.uniform(cfg.v1_range);
            let limit = match cfg.expansion {
                ThresholdExpansion::PerPopulation => threshold.max(kth_nearest[w]),
                ThresholdExpansion::Global => global,
            };
            VoterPopulation {
                id: format!("w{w}"),
                covering_set: (0..n).filter(|&j| dist[j] <= limit).map(|j| ids[j].clone()).collect(),
                access: AccessParams {
                    v0: 100.0 - v1,
                    v1,
                    a: (0..n).map(|j| (ids[j].clone(), distance_benefit(dist[j]))).collect(),
                },
                weight: 1.0,
            }
        })
        .collect();

    let inst = Instance {
        locations,
        start: ids[start].clone(),
        edge_costs,
        populations,
        q: cfg.q,
    };
    Ok((inst, pop_xy))
}

/// Grid distance from each population position to each location of `inst`
/// (`[population][location]`). Locations without coordinates are at the origin.
pub fn grid_distances(inst: &Instance, pop_xy: &[(f64, f64)]) -> Vec<Vec<f64>> {
    pop_xy
        .iter()
        .map(|&p| {
            inst.locations
                .iter()
                .map(|l| manhattan(p, l.coords.unwrap_or((0.0, 0.0))))
                .collect()
        })
        .collect()
}

/// Travel durations (minutes) from each population to each location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DurationInputs {
    /// `[population][location]`
    pub walk: Vec<Vec<f64>>,
    pub transit: Vec<Vec<f64>>,
    pub drive: Vec<Vec<f64>>,
    pub other: Vec<Vec<f64>>,
    /// Fraction of each population with a vehicle.
    pub vehicle_fraction: Vec<f64>,
    /// Per population, `(work location, fraction working there)`.
    pub work_share: Vec<Vec<(usize, f64)>>,
    /// `[location][work location]` walking time.
    pub work_walk: Vec<Vec<f64>>,
    /// Turnout fraction per population.
    pub v1: Vec<f64>,
}

impl DurationInputs {
    pub fn num_populations(&self) -> usize {
        self.walk.len()
    }

    pub fn num_locations(&self) -> usize {
        self.walk.first().map_or(0, Vec::len)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccessTable {
    pub v0: Vec<f64>,
    pub v1: Vec<f64>,
    /// `[population][location]`
    pub a: Vec<Vec<f64>>,
}

impl AccessTable {
    /// Access parameters of population `w` keyed by the given location ids.
    pub fn params(&self, w: usize, ids: &[String]) -> AccessParams {
        AccessParams {
            v0: self.v0[w],
            v1: self.v1[w],
            a: ids.iter().cloned().zip(self.a[w].iter().copied()).collect::<BTreeMap<_, _>>(),
        }
    }
}

/// Box benefits from travel times: inverse-square in every mode, scaled by
/// `0.04 / v1`. `v0` is `1 − v1`.
pub fn build_access_params(inputs: &DurationInputs) -> Result<AccessTable, DblpError> {
    let nw = inputs.num_populations();
    let nn = inputs.num_locations();
    let inv_sq = |d: f64, what: &str| -> Result<f64, DblpError> {
        if d > 0.0 && d.is_finite() {
            Ok(1.0 / (d * d))
        } else {
            Err(DblpError::InvalidArgument(format!("{what} duration {d} must be positive")))
        }
    };
    let mut a = vec![vec![0.0; nn]; nw];
    for w in 0..nw {
        let v1 = inputs.v1[w];
        if !(v1 > 0.0 && v1 <= 1.0) {
            return Err(DblpError::InvalidArgument(format!("turnout {v1} is outside (0, 1]")));
        }
        let lambda = inputs.vehicle_fraction[w];
        for n in 0..nn {
            let mut sum = inv_sq(inputs.walk[w][n], "walk")?
                + inv_sq(inputs.transit[w][n], "transit")?
                + lambda * inv_sq(inputs.drive[w][n], "drive")?
                + inv_sq(inputs.other[w][n], "other")?;
            for &(q, share) in &inputs.work_share[w] {
                sum += share * inv_sq(inputs.work_walk[n][q], "work walk")?;
            }
            a[w][n] = 0.04 / v1 * sum;
        }
    }
    Ok(AccessTable {
        v0: inputs.v1.iter().map(|v| 1.0 - v).collect(),
        v1: inputs.v1.clone(),
        a,
    })
}

/// Miles covered per minute by the "other" mode, used as road distance.
pub const ROAD_MILES_PER_MINUTE: f64 = 15.0 / 60.0;

/// Location `n` covers population `w` when at least two of: walk within
/// 15 min, drive within 15 min, transit within 30 min, road distance within
/// 4 miles, all thresholds multiplied by `factor`.
pub fn build_covering_sets(inputs: &DurationInputs, factor: f64) -> Vec<Vec<usize>> {
    (0..inputs.num_populations())
        .map(|w| {
            (0..inputs.num_locations())
                .filter(|&n| {
                    let hits = [
                        inputs.walk[w][n] <= 15.0 * factor,
                        inputs.drive[w][n] <= 15.0 * factor,
                        inputs.transit[w][n] <= 30.0 * factor,
                        inputs.other[w][n] * ROAD_MILES_PER_MINUTE <= 4.0 * factor,
                    ];
                    hits.iter().filter(|&&h| h).count() >= 2
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table5Row {
    pub distance: f64,
    pub marginal_increase: f64,
    pub one_mile_benefit: f64,
}

/// Access gain from a single box at distance `d` for a population with
/// `v0 = 30`, `v1 = 70`.
pub fn single_box_gain(d: f64) -> f64 {
    let a = (2.5 - d).exp();
    (70.0 + a) / (100.0 + a) - 0.7
}

/// Gain from one box at distances 0.2, 0.4, …, 3.0 and the loss from moving
/// it one unit further away.
pub fn table5_family() -> Vec<Table5Row> {
    (1..=15)
        .map(|k| {
            let d = 0.2 * k as f64;
            let m = single_box_gain(d);
            Table5Row {
                distance: d,
                marginal_increase: m,
                one_mile_benefit: m - single_box_gain(d + 1.0),
            }
        })
        .collect()
}
