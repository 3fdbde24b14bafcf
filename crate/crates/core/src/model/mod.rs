//! Problem data for drop box location: candidate sites, the collection tour's
//! edge costs, voter populations with their covering sets and access
//! parameters, and the solution record shared by both solvers.

pub(crate) mod access;
mod cost;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use access::{access_value, dominance_filter, epsilon_default, reformulated_costs};
pub use cost::{annualize_fixed, annualize_operational, edge_cost_from_travel};

/// Absolute tolerance for money comparisons.
pub const MONEY_TOL: f64 = 1e-6;
/// Absolute tolerance for access comparisons.
pub const ACCESS_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DblpError {
    #[error("invalid instance: {}", join(.0))]
    InvalidInstance(Vec<Diagnostic>),
    #[error("unknown location id `{0}`")]
    UnknownLocation(String),
    #[error("access bound {r} is unreachable for population `{population}` (at most {max_access} with every box)")]
    AccessUnreachable { population: String, r: f64, max_access: f64 },
    #[error("population `{population}` needs {needed} covering boxes but only {available} exist")]
    CoverageUnreachable { population: String, needed: usize, available: usize },
    #[error("no feasible solution: {0}")]
    Infeasible(String),
    #[error("node limit reached before optimality was proven")]
    NodeLimit,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
}

/// A structural problem found by [`Instance::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    DuplicateLocation(String),
    DuplicatePopulation(String),
    UnknownStart(String),
    StartNotRequired(String),
    NegativeFixedCost(String),
    CostMatrixSize { expected: usize, found: usize },
    AsymmetricCost { a: String, b: String },
    InvalidEdgeCost { a: String, b: String },
    UnknownCoveringLocation { population: String, location: String },
    InsufficientCoverage { population: String, size: usize, q: u32 },
    NonPositiveAccess { population: String, parameter: String },
    MissingAccessValue { population: String, location: String },
    NegativeWeight(String),
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::DuplicateLocation(id) => write!(f, "duplicate location id `{id}`"),
            Diagnostic::DuplicatePopulation(id) => write!(f, "duplicate population id `{id}`"),
            Diagnostic::UnknownStart(id) => write!(f, "start `{id}` is not a location"),
            Diagnostic::StartNotRequired(id) => write!(f, "start `{id}` is not marked required"),
            Diagnostic::NegativeFixedCost(id) => write!(f, "location `{id}` has a negative fixed cost"),
            Diagnostic::CostMatrixSize { expected, found } => {
                write!(f, "edge cost matrix covers {found} locations, expected {expected}")
            }
            Diagnostic::AsymmetricCost { a, b } => write!(f, "edge cost `{a}`-`{b}` is not symmetric"),
            Diagnostic::InvalidEdgeCost { a, b } => {
                write!(f, "edge cost `{a}`-`{b}` is negative or not finite")
            }
            Diagnostic::UnknownCoveringLocation { population, location } => {
                write!(f, "population `{population}` is covered by unknown location `{location}`")
            }
            Diagnostic::InsufficientCoverage { population, size, q } => write!(
                f,
                "population `{population}` has {size} covering locations, fewer than q = {q}"
            ),
            Diagnostic::NonPositiveAccess { population, parameter } => {
                write!(f, "population `{population}` has non-positive access parameter {parameter}")
            }
            Diagnostic::MissingAccessValue { population, location } => {
                write!(f, "population `{population}` has no access value for location `{location}`")
            }
            Diagnostic::NegativeWeight(id) => write!(f, "population `{id}` has a negative weight"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub id: String,
    /// Cost of placing a box here over the planning horizon.
    pub fixed_cost: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<(f64, f64)>,
    pub required: bool,
}

/// Symmetric operational travel costs between locations, in location order.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeCosts {
    n: usize,
    data: Vec<f64>,
}

impl EdgeCosts {
    pub fn from_fn(n: usize, mut cost: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..i {
                let c = cost(i, j);
                data[i * n + j] = c;
                data[j * n + i] = c;
            }
        }
        EdgeCosts { n, data }
    }

    /// Full square matrix; may be asymmetric (reported by validation).
    pub fn from_matrix(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut data = vec![0.0; n * n];
        for (i, row) in rows.iter().enumerate() {
            for (j, &c) in row.iter().enumerate().take(n) {
                data[i * n + j] = c;
            }
        }
        EdgeCosts { n, data }
    }

    /// Row `i` holds the costs to locations `0..i`.
    pub fn from_lower_triangle(rows: &[Vec<f64>]) -> Option<Self> {
        let n = rows.len();
        if rows.iter().enumerate().any(|(i, r)| r.len() != i) {
            return None;
        }
        Some(Self::from_fn(n, |i, j| rows[i][j]))
    }

    pub fn lower_triangle(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| (0..i).map(|j| self.get(i, j)).collect()).collect()
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Cost between `i` and `j`; zero on the diagonal.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            self.data[i * self.n + j]
        }
    }

    /// Cost of the closed walk visiting `tour` in order (a single stop costs
    /// nothing, two stops traverse their edge twice).
    pub fn cycle_cost(&self, tour: &[usize]) -> f64 {
        match tour.len() {
            0 | 1 => 0.0,
            2 => 2.0 * self.get(tour[0], tour[1]),
            k => (0..k).map(|p| self.get(tour[p], tour[(p + 1) % k])).sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccessParams {
    /// Propensity not to vote.
    pub v0: f64,
    /// Accessibility of voting pathways other than drop boxes.
    pub v1: f64,
    /// Per-location benefit of a drop box, keyed by location id.
    pub a: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoterPopulation {
    pub id: String,
    pub covering_set: Vec<String>,
    pub access: AccessParams,
    /// Head count; used for weighted metrics only.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub locations: Vec<Location>,
    pub start: String,
    pub edge_costs: EdgeCosts,
    pub populations: Vec<VoterPopulation>,
    pub q: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum ObjectiveMode {
    MinCost,
    /// Maximize the weight of populations covered `q` times while every
    /// population keeps at least `base_coverage` covering boxes.
    MaxCoverage { base_coverage: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub r: f64,
    pub objective: ObjectiveMode,
    pub budget: Option<f64>,
    pub tour_cost_cap: Option<f64>,
    pub fixed_count: Option<usize>,
    pub dominance_filter: bool,
    pub node_limit: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            r: 0.0,
            objective: ObjectiveMode::MinCost,
            budget: None,
            tour_cost_cap: None,
            fixed_count: None,
            dominance_filter: false,
            node_limit: None,
        }
    }
}

impl SolveOptions {
    pub fn with_r(r: f64) -> Self {
        SolveOptions {
            r,
            ..Default::default()
        }
    }

    /// Coverage multiplicity every population must keep.
    pub fn base_coverage(&self, inst: &Instance) -> u32 {
        match self.objective {
            ObjectiveMode::MinCost => inst.q,
            ObjectiveMode::MaxCoverage { base_coverage } => base_coverage,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    /// Selected locations, in instance order.
    pub selected: Vec<String>,
    /// Collection tour starting at the start location.
    pub tour: Vec<String>,
    pub total_cost: f64,
    pub fixed_cost: f64,
    pub operational_cost: f64,
    pub min_access: f64,
    pub access_by_population: BTreeMap<String, f64>,
}

impl Instance {
    /// Every violated structural invariant; empty when the instance is usable.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut ids = HashSet::new();
        for loc in &self.locations {
            if !ids.insert(loc.id.as_str()) {
                out.push(Diagnostic::DuplicateLocation(loc.id.clone()));
            }
            if !(loc.fixed_cost >= 0.0) || !loc.fixed_cost.is_finite() {
                out.push(Diagnostic::NegativeFixedCost(loc.id.clone()));
            }
        }
        match self.locations.iter().find(|l| l.id == self.start) {
            None => out.push(Diagnostic::UnknownStart(self.start.clone())),
            Some(l) if !l.required => out.push(Diagnostic::StartNotRequired(self.start.clone())),
            Some(_) => {}
        }
        let n = self.locations.len();
        if self.edge_costs.len() != n {
            out.push(Diagnostic::CostMatrixSize {
                expected: n,
                found: self.edge_costs.len(),
            });
        } else {
            for i in 0..n {
                for j in 0..i {
                    let (a, b) = (&self.locations[i].id, &self.locations[j].id);
                    let cij = self.edge_costs.data[i * n + j];
                    let cji = self.edge_costs.data[j * n + i];
                    if !(cij >= 0.0 && cji >= 0.0) || !cij.is_finite() || !cji.is_finite() {
                        out.push(Diagnostic::InvalidEdgeCost { a: a.clone(), b: b.clone() });
                    } else if cij != cji {
                        out.push(Diagnostic::AsymmetricCost { a: b.clone(), b: a.clone() });
                    }
                }
            }
        }
        let mut pop_ids = HashSet::new();
        for pop in &self.populations {
            if !pop_ids.insert(pop.id.as_str()) {
                out.push(Diagnostic::DuplicatePopulation(pop.id.clone()));
            }
            let mut members = HashSet::new();
            for loc in &pop.covering_set {
                if !ids.contains(loc.as_str()) {
                    out.push(Diagnostic::UnknownCoveringLocation {
                        population: pop.id.clone(),
                        location: loc.clone(),
                    });
                } else {
                    members.insert(loc.as_str());
                }
            }
            if members.len() < self.q as usize {
                out.push(Diagnostic::InsufficientCoverage {
                    population: pop.id.clone(),
                    size: members.len(),
                    q: self.q,
                });
            }
            for (name, v) in [("v0", pop.access.v0), ("v1", pop.access.v1)] {
                if !(v > 0.0) || !v.is_finite() {
                    out.push(Diagnostic::NonPositiveAccess {
                        population: pop.id.clone(),
                        parameter: name.to_string(),
                    });
                }
            }
            for loc in &self.locations {
                match pop.access.a.get(&loc.id) {
                    None => out.push(Diagnostic::MissingAccessValue {
                        population: pop.id.clone(),
                        location: loc.id.clone(),
                    }),
                    Some(&v) if !(v > 0.0) || !v.is_finite() => out.push(Diagnostic::NonPositiveAccess {
                        population: pop.id.clone(),
                        parameter: format!("a[{}]", loc.id),
                    }),
                    Some(_) => {}
                }
            }
            if !(pop.weight >= 0.0) {
                out.push(Diagnostic::NegativeWeight(pop.id.clone()));
            }
        }
        out
    }

    pub fn location_index(&self, id: &str) -> Option<usize> {
        self.locations.iter().position(|l| l.id == id)
    }

    pub fn required_ids(&self) -> impl Iterator<Item = &str> {
        self.locations.iter().filter(|l| l.required).map(|l| l.id.as_str())
    }

    /// Minimum access over all populations when every location is selected.
    pub fn max_min_access(&self) -> f64 {
        self.populations
            .iter()
            .map(|p| {
                let s: f64 = p.access.a.values().sum();
                (p.access.v1 + s) / (p.access.v0 + p.access.v1 + s)
            })
            .fold(1.0, f64::min)
    }

    pub(crate) fn indexed(&self) -> Result<Indexed<'_>, DblpError> {
        let diags = self.validate();
        if !diags.is_empty() {
            return Err(DblpError::InvalidInstance(diags));
        }
        Ok(Indexed::new(self))
    }

    /// Builds a [`Solution`] for `selected` with the given tour, both as ids.
    pub fn solution_from_tour(&self, tour: &[String]) -> Result<Solution, DblpError> {
        let ix = self.indexed()?;
        let idx = tour
            .iter()
            .map(|id| ix.index(id))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ix.solution(&idx))
    }
}

/// Dense per-population data for the solvers.
#[derive(Debug, Clone)]
pub(crate) struct Population {
    pub cover: Vec<usize>,
    pub covers: Vec<bool>,
    pub v0: f64,
    pub v1: f64,
    pub a: Vec<f64>,
}

impl Population {
    #[inline]
    pub fn access_from_sum(&self, sum_a: f64) -> f64 {
        (self.v1 + sum_a) / (self.v0 + self.v1 + sum_a)
    }

    pub fn access_of(&self, selected: &[usize]) -> f64 {
        self.access_from_sum(selected.iter().map(|&j| self.a[j]).sum())
    }

    pub fn coverage_of(&self, selected: &[usize]) -> usize {
        selected.iter().filter(|&&j| self.covers[j]).count()
    }
}

/// Index-based view of a validated instance.
#[derive(Debug, Clone)]
pub(crate) struct Indexed<'a> {
    pub inst: &'a Instance,
    pub n: usize,
    pub start: usize,
    pub required: Vec<bool>,
    pub fixed: Vec<f64>,
    pub pops: Vec<Population>,
    index: HashMap<&'a str, usize>,
}

impl<'a> Indexed<'a> {
    fn new(inst: &'a Instance) -> Self {
        let n = inst.locations.len();
        let index: HashMap<&str, usize> = inst
            .locations
            .iter()
            .enumerate()
            .map(|(i, l)| (l.id.as_str(), i))
            .collect();
        let pops = inst
            .populations
            .iter()
            .map(|p| {
                let mut covers = vec![false; n];
                for id in &p.covering_set {
                    covers[index[id.as_str()]] = true;
                }
                Population {
                    cover: (0..n).filter(|&j| covers[j]).collect(),
                    covers,
                    v0: p.access.v0,
                    v1: p.access.v1,
                    a: inst.locations.iter().map(|l| p.access.a[&l.id]).collect(),
                }
            })
            .collect();
        Indexed {
            inst,
            n,
            start: index[inst.start.as_str()],
            required: inst.locations.iter().map(|l| l.required).collect(),
            fixed: inst.locations.iter().map(|l| l.fixed_cost).collect(),
            pops,
            index,
        }
    }

    pub fn index(&self, id: &str) -> Result<usize, DblpError> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| DblpError::UnknownLocation(id.to_string()))
    }

    pub fn id(&self, i: usize) -> &'a str {
        &self.inst.locations[i].id
    }

    pub fn costs(&self) -> &'a EdgeCosts {
        &self.inst.edge_costs
    }

    pub fn required_list(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.required[i]).collect()
    }

    /// Minimum access over populations; 1 when there are none.
    pub fn min_access(&self, selected: &[usize]) -> f64 {
        self.pops.iter().map(|p| p.access_of(selected)).fold(1.0, f64::min)
    }

    pub fn solution(&self, tour: &[usize]) -> Solution {
        let mut selected = tour.to_vec();
        selected.sort_unstable();
        let fixed_cost: f64 = selected.iter().map(|&j| self.fixed[j]).sum();
        let operational_cost = self.costs().cycle_cost(tour);
        let access_by_population: BTreeMap<String, f64> = self
            .inst
            .populations
            .iter()
            .zip(&self.pops)
            .map(|(p, d)| (p.id.clone(), d.access_of(&selected)))
            .collect();
        Solution {
            selected: selected.iter().map(|&j| self.id(j).to_string()).collect(),
            tour: tour.iter().map(|&j| self.id(j).to_string()).collect(),
            total_cost: fixed_cost + operational_cost,
            fixed_cost,
            operational_cost,
            min_access: access_by_population.values().copied().fold(1.0, f64::min),
            access_by_population,
        }
    }
}

/// Rotates `tour` to start at `start` and orients it so the second stop has
/// the smaller index of the two neighbours of `start`.
pub(crate) fn canonical_tour(tour: &[usize], start: usize) -> Vec<usize> {
    let k = tour.len();
    let Some(p) = tour.iter().position(|&v| v == start) else {
        return tour.to_vec();
    };
    let fwd: Vec<usize> = (0..k).map(|i| tour[(p + i) % k]).collect();
    if k <= 2 {
        return fwd;
    }
    let rev: Vec<usize> = (0..k).map(|i| tour[(p + k - i) % k]).collect();
    if rev[1] < fwd[1] {
        rev
    } else {
        fwd
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::instance;
    use super::*;

    #[test]
    fn well_formed_instance_has_no_diagnostics() {
        let inst = instance(4, &[1.0; 4], |i, j| (i + j) as f64, &[&[1, 2], &[2, 3]], 1);
        assert_eq!(inst.validate(), vec![]);
    }

    #[test]
    fn short_covering_set_is_reported_once() {
        let inst = instance(4, &[1.0; 4], |_, _| 1.0, &[&[1, 2], &[3]], 2);
        assert_eq!(
            inst.validate(),
            vec![Diagnostic::InsufficientCoverage {
                population: "w1".into(),
                size: 1,
                q: 2
            }]
        );
    }

    #[test]
    fn asymmetric_cost_is_reported() {
        let mut inst = instance(4, &[1.0; 4], |_, _| 1.0, &[&[1]], 1);
        let mut m: Vec<Vec<f64>> = vec![vec![1.0; 4]; 4];
        m[1][2] = 5.0;
        inst.edge_costs = EdgeCosts::from_matrix(&m);
        let d = inst.validate();
        assert_eq!(d.len(), 1);
        assert!(matches!(d[0], Diagnostic::AsymmetricCost { .. }));
    }

    #[test]
    fn start_must_be_required_and_ids_unique() {
        let mut inst = instance(3, &[0.0; 3], |_, _| 1.0, &[], 0);
        inst.locations[0].required = false;
        inst.locations[2].id = "l1".into();
        let d = inst.validate();
        assert!(d.contains(&Diagnostic::StartNotRequired("l0".into())));
        assert!(d.contains(&Diagnostic::DuplicateLocation("l1".into())));
    }

    #[test]
    fn non_positive_access_is_reported() {
        let mut inst = instance(3, &[0.0; 3], |_, _| 1.0, &[&[1]], 1);
        inst.populations[0].access.v0 = 0.0;
        inst.populations[0].access.a.insert("l2".into(), -1.0);
        assert_eq!(inst.validate().len(), 2);
    }

    #[test]
    fn lower_triangle_round_trip() {
        let c = EdgeCosts::from_fn(5, |i, j| (i * 10 + j) as f64);
        let lt = c.lower_triangle();
        assert_eq!(lt[0].len(), 0);
        assert_eq!(lt[4].len(), 4);
        assert_eq!(EdgeCosts::from_lower_triangle(&lt), Some(c));
        assert_eq!(EdgeCosts::from_lower_triangle(&[vec![1.0]]), None);
    }

    #[test]
    fn cycle_cost_of_short_tours() {
        let c = EdgeCosts::from_fn(3, |_, _| 2.5);
        assert_eq!(c.cycle_cost(&[0]), 0.0);
        assert_eq!(c.cycle_cost(&[0, 2]), 5.0);
        assert_eq!(c.cycle_cost(&[0, 1, 2]), 7.5);
    }

    #[test]
    fn canonical_tour_is_rotation_and_reflection_free() {
        let a = canonical_tour(&[3, 0, 4, 1], 0);
        let b = canonical_tour(&[1, 4, 0, 3], 0);
        assert_eq!(a, b);
        assert_eq!(a, vec![0, 3, 1, 4]);
    }

    #[test]
    fn solution_cost_decomposes() {
        let inst = instance(3, &[2.0, 4.0, 6.0], |_, _| 1.0, &[&[1]], 1);
        let sol = inst
            .solution_from_tour(&["l0".into(), "l1".into(), "l2".into()])
            .unwrap();
        assert_eq!(sol.fixed_cost, 12.0);
        assert_eq!(sol.operational_cost, 3.0);
        assert_eq!(sol.total_cost, 15.0);
        assert_eq!(sol.min_access, 100.0 / 130.0);
    }
}
