//! Exact solution of a single access bound by branch and bound over a binary
//! program, with subtour elimination rows added lazily.

use std::fmt;
use std::sync::Arc;

use boxloc_bip::{BinaryProgram, LinearRow, Sense, Separator, Status};

use crate::model::access::dominated_indices;
use crate::model::{
    canonical_tour, DblpError, Indexed, Instance, ObjectiveMode, Solution, SolveOptions, ACCESS_TOL,
    MONEY_TOL,
};

/// Variable layout of the encoded program: one `x` per unordered location
/// pair (lexicographic), then one `y` per location, then one `δ` per
/// population when maximizing coverage.
#[derive(Debug, Clone)]
pub struct DblpEncoding {
    n: usize,
    edges: Vec<(usize, usize)>,
    required: Vec<bool>,
    num_populations: usize,
    with_delta: bool,
}

impl DblpEncoding {
    fn new(n: usize, required: Vec<bool>, num_populations: usize, with_delta: bool) -> Self {
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        DblpEncoding {
            n,
            edges,
            required,
            num_populations,
            with_delta,
        }
    }

    pub fn num_locations(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_vars(&self) -> usize {
        self.edges.len() + self.n + if self.with_delta { self.num_populations } else { 0 }
    }

    pub fn x_var(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        assert!(j < self.n && i != j, "no edge ({i}, {j})");
        i * self.n - i * (i + 1) / 2 + (j - i - 1)
    }

    pub fn y_var(&self, j: usize) -> usize {
        assert!(j < self.n);
        self.edges.len() + j
    }

    pub fn delta_var(&self, w: usize) -> Option<usize> {
        (self.with_delta && w < self.num_populations).then(|| self.edges.len() + self.n + w)
    }

    /// Splits a full assignment into its edge and location parts.
    pub fn split<'a>(&self, assignment: &'a [bool]) -> (&'a [bool], &'a [bool]) {
        let m = self.edges.len();
        (&assignment[..m], &assignment[m..m + self.n])
    }
}

/// One cycle of an integral edge assignment, as sorted location indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subtour {
    pub nodes: Vec<usize>,
}

/// Connected pieces of the edge assignment `x`, ordered by their smallest
/// location index. Locations without edges are omitted.
pub fn subtours(enc: &DblpEncoding, x: &[bool]) -> Vec<Subtour> {
    let mut adj = vec![Vec::new(); enc.n];
    for (e, &(i, j)) in enc.edges.iter().enumerate() {
        if x[e] {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    components(&adj)
        .into_iter()
        .map(|nodes| Subtour { nodes })
        .collect()
}

fn components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; adj.len()];
    let mut out = Vec::new();
    for root in 0..adj.len() {
        if seen[root] || adj[root].is_empty() {
            continue;
        }
        seen[root] = true;
        let mut stack = vec![root];
        let mut comp = Vec::new();
        while let Some(v) = stack.pop() {
            comp.push(v);
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

fn cut_row(enc: &DblpEncoding, inside: &[bool], t: usize) -> LinearRow {
    let terms = enc
        .edges
        .iter()
        .enumerate()
        .filter(|(_, &(i, j))| inside[i] != inside[j])
        .map(|(e, _)| (e, 1.0))
        .chain(std::iter::once((enc.y_var(t), -2.0)));
    LinearRow::new(terms, Sense::Ge, 0.0)
}

/// Subtour elimination for an integral assignment: for the first cycle that
/// misses some required location, one row `x(δ(S)) ≥ 2 y_t` per member `t`.
/// Empty when the selected locations form a single tour through every
/// required location.
pub fn separate_subtours(enc: &DblpEncoding, x: &[bool], y: &[bool]) -> Vec<LinearRow> {
    for tour in subtours(enc, x) {
        let mut inside = vec![false; enc.n];
        for &v in &tour.nodes {
            inside[v] = true;
        }
        if (0..enc.n).any(|t| enc.required[t] && !inside[t]) {
            return tour
                .nodes
                .iter()
                .filter(|&&t| y[t])
                .map(|&t| cut_row(enc, &inside, t))
                .collect();
        }
    }
    Vec::new()
}

struct SubtourSeparator {
    enc: DblpEncoding,
    fractional: bool,
}

impl Separator for SubtourSeparator {
    fn separate(&self, assignment: &[bool]) -> Vec<LinearRow> {
        let (x, y) = self.enc.split(assignment);
        separate_subtours(&self.enc, x, y)
    }

    fn separate_fractional(&self, values: &[f64]) -> Vec<LinearRow> {
        if !self.fractional {
            return Vec::new();
        }
        min_cut_rows(&self.enc, values)
    }
}

/// Smallest violation for which a fractional subtour row is worth adding.
const MIN_CUT_VIOLATION: f64 = 0.1;

/// Violated subtour rows at a fractional point, found by a minimum cut
/// between a required location and every location with positive `y`.
fn min_cut_rows(enc: &DblpEncoding, values: &[f64]) -> Vec<LinearRow> {
    let n = enc.n;
    let m = enc.edges.len();
    let Some(root) = (0..n).find(|&t| enc.required[t]) else {
        return Vec::new();
    };
    let mut cap = vec![0.0; n * n];
    for (e, &(i, j)) in enc.edges.iter().enumerate() {
        let v = values[e].max(0.0);
        cap[i * n + j] = v;
        cap[j * n + i] = v;
    }
    let mut seen_cuts: Vec<Vec<bool>> = Vec::new();
    let mut rows = Vec::new();
    let mut order: Vec<usize> = (0..n).filter(|&t| t != root && values[m + t] > 1e-6).collect();
    order.sort_by(|&a, &b| values[m + b].total_cmp(&values[m + a]).then(a.cmp(&b)));
    for t in order {
        let y = values[m + t];
        if seen_cuts.iter().any(|s| s[t]) {
            continue;
        }
        let (flow, source_side) = max_flow(&cap, n, root, t, 2.0 * y);
        if flow < 2.0 * y - MIN_CUT_VIOLATION {
            let inside: Vec<bool> = source_side.iter().map(|&r| !r).collect();
            rows.push(cut_row(enc, &inside, t));
            seen_cuts.push(inside);
        }
    }
    rows.retain(|r| r.violation(values) > MIN_CUT_VIOLATION);
    rows
}

/// Value of a maximum `s`-`t` flow (stopping once `enough` is reached) and
/// the set of nodes reachable from `s` in the final residual graph.
fn max_flow(cap: &[f64], n: usize, s: usize, t: usize, enough: f64) -> (f64, Vec<bool>) {
    let mut residual = cap.to_vec();
    let mut flow = 0.0;
    loop {
        let mut parent = vec![usize::MAX; n];
        parent[s] = s;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            if u == t {
                break;
            }
            for v in 0..n {
                if parent[v] == usize::MAX && residual[u * n + v] > 1e-9 {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if parent[t] == usize::MAX || flow >= enough - 1e-9 {
            let reach = parent.iter().map(|&p| p != usize::MAX).collect();
            return (flow, reach);
        }
        let mut bottleneck = f64::INFINITY;
        let mut v = t;
        while v != s {
            let u = parent[v];
            bottleneck = bottleneck.min(residual[u * n + v]);
            v = u;
        }
        let mut v = t;
        while v != s {
            let u = parent[v];
            residual[u * n + v] -= bottleneck;
            residual[v * n + u] += bottleneck;
            v = u;
        }
        flow += bottleneck;
    }
}

/// Encodes `options` over `inst` as a binary program whose integral solutions
/// (once clean for [`separate_subtours`]) are the feasible selections of at
/// least three boxes.
pub fn encode(inst: &Instance, options: &SolveOptions) -> Result<(DblpEncoding, BinaryProgram), DblpError> {
    let ix = inst.indexed()?;
    check_reachable(&ix, options)?;
    Ok(encode_indexed(&ix, options, true))
}

fn check_reachable(ix: &Indexed<'_>, options: &SolveOptions) -> Result<(), DblpError> {
    if !(0.0..1.0).contains(&options.r) {
        return Err(DblpError::InvalidArgument(format!("r = {} is outside [0, 1)", options.r)));
    }
    let base = options.base_coverage(ix.inst) as usize;
    for (p, pop) in ix.inst.populations.iter().zip(&ix.pops) {
        if pop.cover.len() < base {
            return Err(DblpError::CoverageUnreachable {
                population: p.id.clone(),
                needed: base,
                available: pop.cover.len(),
            });
        }
        let all: f64 = pop.a.iter().sum();
        let best = pop.access_from_sum(all);
        if best + ACCESS_TOL < options.r {
            return Err(DblpError::AccessUnreachable {
                population: p.id.clone(),
                r: options.r,
                max_access: best,
            });
        }
    }
    if let Some(k) = options.fixed_count {
        let t = ix.required.iter().filter(|&&b| b).count();
        if k < t || k > ix.n {
            return Err(DblpError::Infeasible(format!(
                "box count {k} is incompatible with {t} required of {} locations",
                ix.n
            )));
        }
    }
    Ok(())
}

fn encode_indexed(ix: &Indexed<'_>, options: &SolveOptions, fractional: bool) -> (DblpEncoding, BinaryProgram) {
    let max_cov = matches!(options.objective, ObjectiveMode::MaxCoverage { .. });
    let enc = DblpEncoding::new(ix.n, ix.required.clone(), ix.pops.len(), max_cov);
    let mut bp = BinaryProgram::new(enc.num_vars());
    let costs = ix.costs();
    let cost_terms: Vec<(usize, f64)> = enc
        .edges
        .iter()
        .enumerate()
        .map(|(e, &(i, j))| (e, costs.get(i, j)))
        .collect();
    let fixed_terms: Vec<(usize, f64)> = (0..ix.n).map(|j| (enc.y_var(j), ix.fixed[j])).collect();

    let add = |bp: &mut BinaryProgram, row: LinearRow| bp.add_row(row).expect("encoded row in range");
    let set_obj = |bp: &mut BinaryProgram, v: usize, c: f64| bp.set_objective(v, c).expect("finite objective");

    if max_cov {
        for (w, p) in ix.inst.populations.iter().enumerate() {
            set_obj(&mut bp, enc.delta_var(w).unwrap(), -p.weight);
        }
    } else {
        for &(v, c) in cost_terms.iter().chain(&fixed_terms) {
            set_obj(&mut bp, v, c);
        }
    }

    let r = options.r;
    let skipped: Vec<usize> = if options.dominance_filter {
        dominated_indices(ix)
    } else {
        Vec::new()
    };
    let req = ix.required_list();
    for (w, pop) in ix.pops.iter().enumerate() {
        if r > 0.0 && skipped.binary_search(&w).is_err() && pop.access_of(&req) < r {
            let terms = (0..ix.n).map(|j| (enc.y_var(j), pop.a[j] * (r - 1.0)));
            add(&mut bp, LinearRow::new(terms, Sense::Le, pop.v1 - r * (pop.v0 + pop.v1)));
        }
    }

    let base = options.base_coverage(ix.inst);
    for (w, pop) in ix.pops.iter().enumerate() {
        let cover = pop.cover.iter().map(|&j| (enc.y_var(j), 1.0));
        if base > 0 {
            add(&mut bp, LinearRow::new(cover.clone(), Sense::Ge, f64::from(base)));
        }
        if let Some(d) = enc.delta_var(w) {
            let q = f64::from(ix.inst.q);
            add(&mut bp, LinearRow::new(cover.map(|(v, _)| (v, -1.0)).chain([(d, q)]), Sense::Le, 0.0));
        }
    }

    for &t in &req {
        add(&mut bp, LinearRow::new([(enc.y_var(t), 1.0)], Sense::Ge, 1.0));
    }

    for j in 0..ix.n {
        let terms = (0..ix.n)
            .filter(|&i| i != j)
            .map(|i| (enc.x_var(i, j), 1.0))
            .chain([(enc.y_var(j), -2.0)]);
        add(&mut bp, LinearRow::new(terms, Sense::Eq, 0.0));
    }

    if let Some(b) = options.budget {
        let terms = cost_terms.iter().chain(&fixed_terms).copied();
        add(&mut bp, LinearRow::new(terms, Sense::Le, b + MONEY_TOL / 2.0));
    }
    if let Some(cap) = options.tour_cost_cap {
        add(&mut bp, LinearRow::new(cost_terms.iter().copied(), Sense::Le, cap + MONEY_TOL / 2.0));
    }
    if let Some(k) = options.fixed_count {
        let terms = (0..ix.n).map(|j| (enc.y_var(j), 1.0));
        add(&mut bp, LinearRow::new(terms, Sense::Eq, k as f64));
    }

    for j in 0..ix.n {
        bp.set_branch_priority(enc.y_var(j), 1).expect("location variable in range");
    }
    bp.set_separator(Arc::new(SubtourSeparator {
        enc: enc.clone(),
        fractional,
    }));
    (enc, bp)
}

/// Tour through the selected locations of an integral, separator-clean
/// assignment, starting at the start location.
fn extract_tour(enc: &DblpEncoding, x: &[bool], start: usize) -> Vec<usize> {
    let mut adj = vec![Vec::new(); enc.n];
    for (e, &(i, j)) in enc.edges.iter().enumerate() {
        if x[e] {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    let mut tour = vec![start];
    let (mut prev, mut cur) = (usize::MAX, start);
    loop {
        let Some(&next) = adj[cur].iter().find(|&&v| v != prev) else { break };
        if next == start {
            break;
        }
        tour.push(next);
        prev = cur;
        cur = next;
    }
    canonical_tour(&tour, start)
}

/// Objective of a candidate under `options` (cost, or negated covered weight).
fn objective_of(ix: &Indexed<'_>, options: &SolveOptions, sol: &Solution, tour: &[usize]) -> f64 {
    match options.objective {
        ObjectiveMode::MinCost => sol.total_cost,
        ObjectiveMode::MaxCoverage { .. } => -ix
            .pops
            .iter()
            .zip(&ix.inst.populations)
            .filter(|(p, _)| p.coverage_of(tour) >= ix.inst.q as usize)
            .map(|(_, w)| w.weight)
            .sum::<f64>(),
    }
}

/// Selections of one or two boxes, which the program cannot express.
fn small_selections(ix: &Indexed<'_>, options: &SolveOptions) -> Option<(Solution, f64)> {
    let req = ix.required_list();
    let mut candidates: Vec<Vec<usize>> = Vec::new();
    match req.len() {
        1 => {
            candidates.push(vec![req[0]]);
            candidates.extend((0..ix.n).filter(|&j| j != req[0]).map(|j| vec![req[0], j]));
        }
        2 => candidates.push(if req[0] == ix.start { req.clone() } else { vec![ix.start, req[0]] }),
        _ => {}
    }
    let mut best: Option<(Solution, f64)> = None;
    for tour in candidates {
        let sol = ix.solution(&tour);
        if !check_solution(ix, options, &sol, &tour).is_empty() {
            continue;
        }
        let obj = objective_of(ix, options, &sol, &tour);
        if best.as_ref().is_none_or(|(_, b)| obj < *b) {
            best = Some((sol, obj));
        }
    }
    best
}

/// Optimal selection and tour for `options`.
pub fn solve_exact(inst: &Instance, options: &SolveOptions) -> Result<Solution, DblpError> {
    solve_exact_with(inst, options, true)
}

pub fn solve_exact_with(
    inst: &Instance,
    options: &SolveOptions,
    fractional: bool,
) -> Result<Solution, DblpError> {
    let ix = inst.indexed()?;
    check_reachable(&ix, options)?;
    let small = small_selections(&ix, options);
    let large = if ix.n >= 3 && options.fixed_count.is_none_or(|k| k >= 3) {
        let (enc, bp) = encode_indexed(&ix, options, fractional);
        let result = boxloc_bip::solve(&bp, options.node_limit);
        match result.status {
            Status::Optimal => {
                let assignment = result.assignment.expect("optimal result carries an assignment");
                let (x, _) = enc.split(&assignment);
                let tour = extract_tour(&enc, x, ix.start);
                let sol = ix.solution(&tour);
                let obj = objective_of(&ix, options, &sol, &tour);
                Some((sol, obj))
            }
            Status::Infeasible => None,
            Status::NodeLimit => return Err(DblpError::NodeLimit),
        }
    } else {
        None
    };
    match (small, large) {
        (Some(s), Some(l)) => Ok(if s.1 < l.1 - MONEY_TOL { s.0 } else { l.0 }),
        (Some(s), None) => Ok(s.0),
        (None, Some(l)) => Ok(l.0),
        (None, None) => Err(DblpError::Infeasible(infeasibility_reason(&ix, options))),
    }
}

fn infeasibility_reason(ix: &Indexed<'_>, options: &SolveOptions) -> String {
    let mut parts = Vec::new();
    if options.budget.is_some() {
        parts.push("budget");
    }
    if options.tour_cost_cap.is_some() {
        parts.push("tour cost cap");
    }
    if options.fixed_count.is_some() {
        parts.push("box count");
    }
    if options.r > 0.0 {
        let all: Vec<usize> = (0..ix.n).collect();
        if let Some((p, _)) = ix
            .inst
            .populations
            .iter()
            .zip(&ix.pops)
            .min_by(|a, b| a.1.access_of(&all).total_cmp(&b.1.access_of(&all)))
        {
            return format!(
                "no selection meets every constraint (tightest access: population `{}`{}{})",
                p.id,
                if parts.is_empty() { "" } else { "; active caps: " },
                parts.join(", ")
            );
        }
    }
    if parts.is_empty() {
        "no selection meets every constraint".into()
    } else {
        format!("no selection meets every constraint; active caps: {}", parts.join(", "))
    }
}

/// A problem with a proposed solution.
#[derive(Debug, Clone, PartialEq)]
pub enum SolutionDiagnostic {
    Instance(String),
    UnknownLocation(String),
    MissingRequired(String),
    TourStart { expected: String, found: Option<String> },
    RepeatedStop(String),
    /// Selected locations the tour never reaches.
    Disconnected(Vec<String>),
    TourOutsideSelection(String),
    Coverage { population: String, count: usize, needed: u32 },
    Access { population: String, access: f64, r: f64 },
    CostMismatch { field: &'static str, reported: f64, actual: f64 },
    AccessMismatch { population: String, reported: Option<f64>, actual: f64 },
    Budget { total_cost: f64, budget: f64 },
    TourCap { operational_cost: f64, cap: f64 },
    Count { selected: usize, required: usize },
}

impl fmt::Display for SolutionDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use SolutionDiagnostic::*;
        match self {
            Instance(msg) => write!(f, "instance is invalid: {msg}"),
            UnknownLocation(id) => write!(f, "unknown location `{id}`"),
            MissingRequired(id) => write!(f, "required location `{id}` is not selected"),
            TourStart { expected, found } => match found {
                Some(s) => write!(f, "tour starts at `{s}` instead of `{expected}`"),
                None => write!(f, "tour is empty; it must start at `{expected}`"),
            },
            RepeatedStop(id) => write!(f, "tour visits `{id}` more than once"),
            Disconnected(ids) => write!(f, "tour does not reach selected locations {}", ids.join(", ")),
            TourOutsideSelection(id) => write!(f, "tour visits unselected location `{id}`"),
            Coverage { population, count, needed } => {
                write!(f, "population `{population}` is covered {count} times, needs {needed}")
            }
            Access { population, access, r } => {
                write!(f, "population `{population}` has access {access:.6} below r = {r:.6}")
            }
            CostMismatch { field, reported, actual } => {
                write!(f, "{field} is reported as {reported:.6} but is {actual:.6}")
            }
            AccessMismatch { population, reported, actual } => match reported {
                Some(v) => write!(f, "access of `{population}` is reported as {v:.6} but is {actual:.6}"),
                None => write!(f, "access of `{population}` is missing (actual {actual:.6})"),
            },
            Budget { total_cost, budget } => write!(f, "total cost {total_cost:.6} exceeds budget {budget:.6}"),
            TourCap { operational_cost, cap } => {
                write!(f, "tour cost {operational_cost:.6} exceeds cap {cap:.6}")
            }
            Count { selected, required } => write!(f, "{selected} boxes selected, exactly {required} required"),
        }
    }
}

/// Every way in which `sol` fails to be a feasible, self-consistent
/// solution under `options`.
pub fn validate_solution(inst: &Instance, options: &SolveOptions, sol: &Solution) -> Vec<SolutionDiagnostic> {
    let ix = match inst.indexed() {
        Ok(ix) => ix,
        Err(e) => return vec![SolutionDiagnostic::Instance(e.to_string())],
    };
    let mut out = Vec::new();
    let mut selected = vec![false; ix.n];
    let mut sel_idx = Vec::new();
    for id in &sol.selected {
        match ix.index(id) {
            Ok(j) if !selected[j] => {
                selected[j] = true;
                sel_idx.push(j);
            }
            Ok(_) => out.push(SolutionDiagnostic::RepeatedStop(id.clone())),
            Err(_) => out.push(SolutionDiagnostic::UnknownLocation(id.clone())),
        }
    }
    let mut tour = Vec::new();
    let mut visited = vec![false; ix.n];
    for id in &sol.tour {
        match ix.index(id) {
            Ok(j) if visited[j] => out.push(SolutionDiagnostic::RepeatedStop(id.clone())),
            Ok(j) => {
                visited[j] = true;
                tour.push(j);
                if !selected[j] {
                    out.push(SolutionDiagnostic::TourOutsideSelection(id.clone()));
                }
            }
            Err(_) => out.push(SolutionDiagnostic::UnknownLocation(id.clone())),
        }
    }
    if sol.tour.first().map(String::as_str) != Some(inst.start.as_str()) {
        out.push(SolutionDiagnostic::TourStart {
            expected: inst.start.clone(),
            found: sol.tour.first().cloned(),
        });
    }
    let unreached: Vec<String> = sel_idx
        .iter()
        .filter(|&&j| !visited[j])
        .map(|&j| ix.id(j).to_string())
        .collect();
    if !unreached.is_empty() {
        out.push(SolutionDiagnostic::Disconnected(unreached));
    }
    sel_idx.sort_unstable();
    out.extend(check_solution(&ix, options, sol, &tour));
    for t in ix.required_list() {
        if !selected[t] {
            out.push(SolutionDiagnostic::MissingRequired(ix.id(t).to_string()));
        }
    }
    let fixed: f64 = sel_idx.iter().map(|&j| ix.fixed[j]).sum();
    let op = ix.costs().cycle_cost(&tour);
    for (field, reported, actual) in [
        ("fixed_cost", sol.fixed_cost, fixed),
        ("operational_cost", sol.operational_cost, op),
        ("total_cost", sol.total_cost, fixed + op),
        ("total_cost", sol.total_cost, sol.fixed_cost + sol.operational_cost),
    ] {
        if !((reported - actual).abs() <= MONEY_TOL * actual.abs().max(1.0)) {
            out.push(SolutionDiagnostic::CostMismatch { field, reported, actual });
            break;
        }
    }
    let mut min_actual = 1.0f64;
    for (p, pop) in inst.populations.iter().zip(&ix.pops) {
        let actual = pop.access_of(&sel_idx);
        min_actual = min_actual.min(actual);
        let reported = sol.access_by_population.get(&p.id).copied();
        if !reported.is_some_and(|v| (v - actual).abs() <= ACCESS_TOL) {
            out.push(SolutionDiagnostic::AccessMismatch {
                population: p.id.clone(),
                reported,
                actual,
            });
        }
    }
    if (sol.min_access - min_actual).abs() > ACCESS_TOL {
        out.push(SolutionDiagnostic::AccessMismatch {
            population: "(minimum)".into(),
            reported: Some(sol.min_access),
            actual: min_actual,
        });
    }
    out
}

/// Constraint checks on a tour given as indices (coverage, access, caps).
fn check_solution(ix: &Indexed<'_>, options: &SolveOptions, sol: &Solution, tour: &[usize]) -> Vec<SolutionDiagnostic> {
    let mut out = Vec::new();
    let base = options.base_coverage(ix.inst);
    for (p, pop) in ix.inst.populations.iter().zip(&ix.pops) {
        let count = pop.coverage_of(tour);
        if count < base as usize {
            out.push(SolutionDiagnostic::Coverage {
                population: p.id.clone(),
                count,
                needed: base,
            });
        }
        let access = pop.access_of(tour);
        if access + ACCESS_TOL < options.r {
            out.push(SolutionDiagnostic::Access {
                population: p.id.clone(),
                access,
                r: options.r,
            });
        }
    }
    if let Some(b) = options.budget {
        if sol.total_cost > b + MONEY_TOL {
            out.push(SolutionDiagnostic::Budget {
                total_cost: sol.total_cost,
                budget: b,
            });
        }
    }
    if let Some(cap) = options.tour_cost_cap {
        if sol.operational_cost > cap + MONEY_TOL {
            out.push(SolutionDiagnostic::TourCap {
                operational_cost: sol.operational_cost,
                cap,
            });
        }
    }
    if let Some(k) = options.fixed_count {
        if sol.selected.len() != k {
            out.push(SolutionDiagnostic::Count {
                selected: sol.selected.len(),
                required: k,
            });
        }
    }
    out
}

/// Solves at each bound in `rs` (other settings from `base`), in order.
pub fn exact_sweep(
    inst: &Instance,
    base: &SolveOptions,
    rs: &[f64],
) -> Vec<Result<crate::heuristic::FrontierEntry, DblpError>> {
    rs.iter()
        .map(|&r| {
            let options = SolveOptions { r, ..base.clone() };
            solve_exact(inst, &options).map(|solution| crate::heuristic::FrontierEntry {
                solution,
                r_satisfied: r,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::instance;

    fn enc_with(n: usize, required: &[usize]) -> DblpEncoding {
        let mut req = vec![false; n];
        for &t in required {
            req[t] = true;
        }
        DblpEncoding::new(n, req, 0, false)
    }

    fn cycles(enc: &DblpEncoding, cycles: &[&[usize]]) -> (Vec<bool>, Vec<bool>) {
        let mut x = vec![false; enc.edges.len()];
        let mut y = vec![false; enc.n];
        for c in cycles {
            for (k, &v) in c.iter().enumerate() {
                x[enc.x_var(v, c[(k + 1) % c.len()])] = true;
                y[v] = true;
            }
        }
        (x, y)
    }

    fn row_terms(row: &LinearRow) -> Vec<usize> {
        row.coefficients().iter().map(|&(v, _)| v).collect()
    }

    #[test]
    fn variable_layout_is_a_bijection() {
        let enc = DblpEncoding::new(6, vec![true; 6], 3, true);
        let mut seen = vec![false; enc.num_vars()];
        for &(i, j) in enc.edges() {
            assert!(!std::mem::replace(&mut seen[enc.x_var(i, j)], true));
            assert_eq!(enc.x_var(i, j), enc.x_var(j, i));
        }
        for j in 0..6 {
            assert!(!std::mem::replace(&mut seen[enc.y_var(j)], true));
        }
        for w in 0..3 {
            assert!(!std::mem::replace(&mut seen[enc.delta_var(w).unwrap()], true));
        }
        assert!(seen.iter().all(|&b| b));
    }

    #[test]
    fn four_locations_two_populations() {
        let inst = instance(4, &[1.0; 4], |i, j| (i + j) as f64, &[&[1, 2], &[2, 3]], 1);
        let (enc, bp) = encode(&inst, &SolveOptions::default()).unwrap();
        assert_eq!(enc.num_vars(), 10);
        assert_eq!(bp.num_vars(), 10);
    }

    #[test]
    fn zero_r_has_no_access_rows() {
        let inst = instance(5, &[1.0; 5], |_, _| 1.0, &[&[1, 2], &[3], &[2, 4]], 1);
        let (enc, bp) = encode(&inst, &SolveOptions::default()).unwrap();
        // covering rows, one y_s bound, degree rows
        assert_eq!(bp.rows().len(), 3 + 1 + 5);
        let covering: Vec<_> = bp.rows()[..3].iter().map(row_terms).collect();
        assert_eq!(covering[1], vec![enc.y_var(3)]);
        let with_r = encode(&inst, &SolveOptions::with_r(0.75)).unwrap().1;
        assert_eq!(with_r.rows().len(), bp.rows().len() + 3);
    }

    #[test]
    fn tsp_reduction_matches_held_karp() {
        let pts = [(0.0, 0.0), (3.0, 1.0), (5.0, 4.0), (1.0, 6.0), (-2.0, 3.0), (2.0, 2.5)];
        let d = |i: usize, j: usize| {
            let (a, b): ((f64, f64), (f64, f64)) = (pts[i], pts[j]);
            (a.0 - b.0).abs() + (a.1 - b.1).abs()
        };
        let mut inst = instance(6, &[0.0; 6], d, &[], 0);
        for l in &mut inst.locations {
            l.required = true;
        }
        let (_, bp) = encode(&inst, &SolveOptions::default()).unwrap();
        assert_eq!(bp.rows().len(), 6 + 6);
        let sol = solve_exact(&inst, &SolveOptions::default()).unwrap();
        let hk = crate::heuristic::rebuild_tour(&[0, 1, 2, 3, 4, 5], &inst.edge_costs, 0);
        assert!((sol.total_cost - inst.edge_costs.cycle_cost(&hk)).abs() < 1e-9);
        assert_eq!(sol.selected.len(), 6);
    }

    #[test]
    fn sole_cover_is_selected() {
        let inst = instance(5, &[1.0, 1.0, 1.0, 50.0, 1.0], |_, _| 1.0, &[&[3]], 1);
        let sol = solve_exact(&inst, &SolveOptions::default()).unwrap();
        assert!(sol.selected.contains(&"l3".to_string()));
        assert_eq!(sol.tour, vec!["l0", "l3"]);
        assert!(validate_solution(&inst, &SolveOptions::default(), &sol).is_empty());
    }

    #[test]
    fn pair_of_required_starts_at_start() {
        let mut inst = instance(4, &[1.0; 4], |_, _| 1.0, &[&[0]], 0);
        inst.locations[0].required = true;
        inst.locations[2].required = true;
        inst.start = "l2".into();
        let sol = solve_exact(&inst, &SolveOptions::default()).unwrap();
        assert_eq!(sol.tour, vec!["l2", "l0"]);
        assert!(validate_solution(&inst, &SolveOptions::default(), &sol).is_empty());
    }

    #[test]
    fn one_clean_cycle_gives_nothing() {
        let enc = enc_with(6, &[0]);
        let (x, y) = cycles(&enc, &[&[0, 2, 4, 1]]);
        assert!(separate_subtours(&enc, &x, &y).is_empty());
    }

    #[test]
    fn detached_cycle_yields_row_per_member() {
        let enc = enc_with(6, &[0]);
        let (x, y) = cycles(&enc, &[&[0, 1, 2], &[3, 4, 5]]);
        let rows = separate_subtours(&enc, &x, &y);
        assert_eq!(rows.len(), 3);
        let crossing: Vec<usize> = [0, 1, 2]
            .iter()
            .flat_map(|&i| [3, 4, 5].map(|j| enc.x_var(i, j)))
            .collect();
        for (row, t) in rows.iter().zip([3, 4, 5]) {
            let mut expect = crossing.clone();
            expect.push(enc.y_var(t));
            expect.sort_unstable();
            assert_eq!(row_terms(row), expect);
            assert!(!row.is_satisfied_by(&[x.clone(), y.clone()].concat()));
        }
    }

    #[test]
    fn first_cycle_wins_when_both_qualify() {
        let enc = enc_with(6, &[0, 3]);
        let (x, y) = cycles(&enc, &[&[3, 4, 5], &[0, 1, 2]]);
        let rows = separate_subtours(&enc, &x, &y);
        assert_eq!(rows.len(), 3);
        for (row, t) in rows.iter().zip([0, 1, 2]) {
            assert!(row_terms(row).contains(&enc.y_var(t)));
        }
    }

    #[test]
    fn fractional_cut_on_split_support() {
        let enc = enc_with(6, &[0]);
        let (x, y) = cycles(&enc, &[&[0, 1, 2], &[3, 4, 5]]);
        let values: Vec<f64> = x.iter().chain(&y).map(|&b| if b { 1.0 } else { 0.0 }).collect();
        let rows = min_cut_rows(&enc, &values);
        assert!(!rows.is_empty());
        assert!(rows.iter().all(|r| r.violation(&values) > 1.0));
        let (x, y) = cycles(&enc, &[&[0, 1, 2, 3, 4, 5]]);
        let values: Vec<f64> = x.iter().chain(&y).map(|&b| if b { 1.0 } else { 0.0 }).collect();
        assert!(min_cut_rows(&enc, &values).is_empty());
    }

    #[test]
    fn two_cycles_are_flagged_disconnected() {
        let inst = instance(6, &[1.0; 6], |_, _| 1.0, &[&[1, 4]], 1);
        let ix = inst.indexed().unwrap();
        let mut sol = ix.solution(&[0, 1, 2]);
        for id in ["l3", "l4", "l5"] {
            sol.selected.push(id.into());
        }
        let diags = validate_solution(&inst, &SolveOptions::default(), &sol);
        assert!(diags
            .iter()
            .any(|d| matches!(d, SolutionDiagnostic::Disconnected(ids) if ids.len() == 3)));
    }

    #[test]
    fn missing_start_is_reported() {
        let inst = instance(4, &[1.0; 4], |_, _| 1.0, &[], 0);
        let ix = inst.indexed().unwrap();
        let mut sol = ix.solution(&[0, 1, 2]);
        sol.selected.retain(|s| s != "l0");
        sol.tour.retain(|s| s != "l0");
        let diags = validate_solution(&inst, &SolveOptions::default(), &sol);
        assert!(diags.contains(&SolutionDiagnostic::MissingRequired("l0".into())));
        assert!(diags.iter().any(|d| matches!(d, SolutionDiagnostic::TourStart { .. })));
    }

    #[test]
    fn unreachable_r_is_rejected_before_solving() {
        let inst = instance(4, &[1.0; 4], |_, _| 1.0, &[&[1]], 1);
        // 70 + 40 over 30 + 70 + 40
        let best = 110.0 / 140.0;
        let err = solve_exact(&inst, &SolveOptions::with_r(best + 0.01)).unwrap_err();
        assert!(matches!(err, DblpError::AccessUnreachable { ref population, .. } if population == "w0"));
        assert!(solve_exact(&inst, &SolveOptions::with_r(best - 1e-9)).is_ok());
    }

    #[test]
    fn variations_are_honoured() {
        let inst = instance(6, &[5.0, 1.0, 2.0, 3.0, 4.0, 6.0], |i, j| (i as f64 - j as f64).abs(), &[&[1, 2, 3]], 1);
        let k = SolveOptions { fixed_count: Some(4), ..Default::default() };
        let sol = solve_exact(&inst, &k).unwrap();
        assert_eq!(sol.selected.len(), 4);
        assert!(validate_solution(&inst, &k, &sol).is_empty());
        let cap = SolveOptions { tour_cost_cap: Some(2.0), r: 0.7, ..Default::default() };
        match solve_exact(&inst, &cap) {
            Ok(sol) => assert!(sol.operational_cost <= 2.0 + MONEY_TOL),
            Err(e) => assert!(matches!(e, DblpError::Infeasible(_))),
        }
        let budget = SolveOptions { budget: Some(5.0), ..Default::default() };
        assert!(matches!(solve_exact(&inst, &budget), Err(DblpError::Infeasible(_))));
    }

    #[test]
    fn coverage_mode_counts_weight() {
        let inst = instance(5, &[1.0; 5], |_, _| 1.0, &[&[1], &[2], &[3, 4]], 1);
        let opts = SolveOptions {
            objective: ObjectiveMode::MaxCoverage { base_coverage: 0 },
            budget: Some(3.0 + 2.0 * 1.0),
            ..Default::default()
        };
        let sol = solve_exact(&inst, &opts).unwrap();
        let covered = inst
            .populations
            .iter()
            .filter(|p| p.covering_set.iter().any(|id| sol.selected.contains(id)))
            .count();
        assert_eq!(covered, 1);
        assert!(sol.total_cost <= 5.0 + MONEY_TOL);
    }
}
