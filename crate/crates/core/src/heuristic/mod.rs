//! Frontier heuristic: start from a cheap covering tour, then repeatedly
//! apply the single add/drop/swap move with the best cost-for-access angle
//! while raising the access bound, collecting every distinct tour visited.

mod tour;

use std::cmp::Ordering;
use std::collections::HashSet;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::model::{canonical_tour, epsilon_default, DblpError, EdgeCosts, Indexed, Instance, Solution};
pub use tour::{estimate_delta_cost, rebuild_tour, EXACT_TOUR_LIMIT};
use tour::{delta_cost_with, Hat};

/// Tolerance when comparing a candidate's access with the bound.
const BOUND_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapCandidate {
    pub remove: Option<String>,
    pub insert: Option<String>,
    pub delta_cost: f64,
    pub delta_access: f64,
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierEntry {
    pub solution: Solution,
    pub r_satisfied: f64,
}

/// Mutually non-dominated entries ordered by increasing minimum access.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Frontier {
    pub entries: Vec<FrontierEntry>,
}

impl Frontier {
    /// Keeps the non-dominated entries of `entries`, sorted by access.
    pub fn from_entries(entries: Vec<FrontierEntry>) -> Self {
        let points: Vec<(f64, f64)> = entries
            .iter()
            .map(|e| (e.solution.total_cost, e.solution.min_access))
            .collect();
        let keep = nondominated_indices(&points);
        let mut kept: Vec<FrontierEntry> = keep.into_iter().map(|i| entries[i].clone()).collect();
        kept.sort_by(|a, b| {
            a.solution
                .min_access
                .total_cmp(&b.solution.min_access)
                .then(a.solution.total_cost.total_cmp(&b.solution.total_cost))
        });
        Frontier { entries: kept }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Counter-clockwise angle from `⟨-1, 0⟩` to `⟨Δr, Δĉ⟩`, in `(0, 2π]`.
pub fn angle(delta_access: f64, delta_cost: f64) -> Result<f64, DblpError> {
    let norm = delta_access.hypot(delta_cost);
    if norm == 0.0 || !norm.is_finite() {
        return Err(DblpError::InvalidArgument("angle of a zero or non-finite vector".into()));
    }
    let base = (-delta_access / norm).clamp(-1.0, 1.0).acos();
    Ok(if delta_cost >= 0.0 { 2.0 * PI - base } else { base })
}

/// Indices of the points not dominated by another (lower or equal cost and
/// higher or equal access, one strictly). Of exact duplicates only the first
/// is kept.
pub fn nondominated_indices(points: &[(f64, f64)]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| {
            let (c, a) = points[i];
            !points.iter().enumerate().any(|(j, &(cj, aj))| {
                j != i && cj <= c && aj >= a && (cj < c || aj > a || j < i)
            })
        })
        .collect()
}

/// The non-dominated `(cost, access)` points, in input order.
pub fn nondominated(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    nondominated_indices(points).into_iter().map(|i| points[i]).collect()
}

/// Greedy covering tour: every population in `cover_sets` gets at least one
/// selected location from its set. Locations are added by newly covered
/// populations per unit of insertion cost, then those covering nothing
/// uniquely are pruned (widest coverage first). Returns the tour.
pub fn ctp_construct(
    required: &[usize],
    cover_sets: &[Vec<usize>],
    costs: &EdgeCosts,
    fixed: &[f64],
    start: usize,
) -> Result<Vec<usize>, DblpError> {
    let n = costs.len();
    let hat = Hat { c: costs, f: fixed };
    let mut in_sel = vec![false; n];
    let mut tour: Vec<usize> = vec![start];
    in_sel[start] = true;
    for &t in required {
        if !in_sel[t] {
            in_sel[t] = true;
            tour.push(t);
        }
    }
    let mut covers_of: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (w, set) in cover_sets.iter().enumerate() {
        for &j in set {
            covers_of[j].push(w);
        }
    }
    let mut covered: Vec<bool> = cover_sets.iter().map(|s| s.iter().any(|&j| in_sel[j])).collect();
    if let Some(w) = (0..cover_sets.len()).find(|&w| !covered[w] && cover_sets[w].is_empty()) {
        return Err(DblpError::Infeasible(format!("population index {w} has no covering location")));
    }
    let insertion_cost = |tour: &[usize], j: usize| -> (f64, usize) {
        let k = tour.len();
        (0..k)
            .map(|p| {
                let (u, v) = (tour[p], tour[(p + 1) % k]);
                (hat.get(u, j) + hat.get(j, v) - hat.get(u, v), p)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .expect("tour is non-empty")
    };
    let mut added = Vec::new();
    while covered.iter().any(|&c| !c) {
        let mut best: Option<(f64, usize, usize)> = None;
        for j in 0..n {
            if in_sel[j] {
                continue;
            }
            let gain = covers_of[j].iter().filter(|&&w| !covered[w]).count();
            if gain == 0 {
                continue;
            }
            let (cost, pos) = insertion_cost(&tour, j);
            let ratio = gain as f64 / cost.max(1e-12);
            if best.is_none_or(|(b, _, _)| ratio > b) {
                best = Some((ratio, j, pos));
            }
        }
        let (_, j, pos) = best.expect("an uncovered population has a covering location");
        tour.insert(pos + 1, j);
        in_sel[j] = true;
        added.push(j);
        for &w in &covers_of[j] {
            covered[w] = true;
        }
    }
    let mut count = vec![0usize; cover_sets.len()];
    for (w, set) in cover_sets.iter().enumerate() {
        count[w] = set.iter().filter(|&&j| in_sel[j]).count();
    }
    added.sort_by(|&a, &b| covers_of[b].len().cmp(&covers_of[a].len()).then(a.cmp(&b)));
    for j in added {
        if covers_of[j].iter().all(|&w| count[w] >= 2) {
            in_sel[j] = false;
            for &w in &covers_of[j] {
                count[w] -= 1;
            }
        }
    }
    let selected: Vec<usize> = (0..n).filter(|&j| in_sel[j]).collect();
    Ok(rebuild_tour(&selected, costs, start))
}

/// A tour that covers every population `q` times, built by `q` covering
/// stages; stage `k` adds one more cover for each population still short.
pub fn initial_solution(inst: &Instance) -> Result<Solution, DblpError> {
    let ix = inst.indexed()?;
    Ok(ix.solution(&initial_tour(&ix)?))
}

fn initial_tour(ix: &Indexed<'_>) -> Result<Vec<usize>, DblpError> {
    let costs = ix.costs();
    let mut tour = rebuild_tour(&ix.required_list(), costs, ix.start);
    for stage in 1..=ix.inst.q as usize {
        let mut in_sel = vec![false; ix.n];
        for &j in &tour {
            in_sel[j] = true;
        }
        let mut cover_sets = Vec::new();
        for (p, pop) in ix.inst.populations.iter().zip(&ix.pops) {
            if pop.coverage_of(&tour) >= stage {
                continue;
            }
            let rest: Vec<usize> = pop.cover.iter().copied().filter(|&j| !in_sel[j]).collect();
            if rest.is_empty() {
                return Err(DblpError::CoverageUnreachable {
                    population: p.id.clone(),
                    needed: ix.inst.q as usize,
                    available: pop.cover.len(),
                });
            }
            cover_sets.push(rest);
        }
        if cover_sets.is_empty() {
            continue;
        }
        tour = ctp_construct(&tour, &cover_sets, costs, &ix.fixed, ix.start)?;
    }
    Ok(tour)
}

/// Incremental state of the current selection.
struct Incumbent {
    tour: Vec<usize>,
    in_sel: Vec<bool>,
    sum_a: Vec<f64>,
    cover: Vec<usize>,
    min_access: f64,
}

impl Incumbent {
    fn new(ix: &Indexed<'_>, tour: Vec<usize>) -> Self {
        let mut in_sel = vec![false; ix.n];
        for &j in &tour {
            in_sel[j] = true;
        }
        let sum_a = ix.pops.iter().map(|p| tour.iter().map(|&j| p.a[j]).sum()).collect();
        let cover = ix.pops.iter().map(|p| p.coverage_of(&tour)).collect();
        let min_access = ix.min_access(&tour);
        Incumbent {
            tour,
            in_sel,
            sum_a,
            cover,
            min_access,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Move {
    remove: Option<usize>,
    insert: Option<usize>,
    delta_cost: f64,
    delta_access: f64,
    angle: f64,
}

/// All moves whose result keeps coverage `q` and access at least `r`, minus
/// those that raise cost while lowering access. With `need_gain` only moves
/// that raise the minimum access are kept.
fn scan(ix: &Indexed<'_>, cur: &Incumbent, r: f64, q: usize, need_gain: bool) -> Vec<Move> {
    let hat = Hat {
        c: ix.costs(),
        f: &ix.fixed,
    };
    let removable: Vec<Option<usize>> = std::iter::once(None)
        .chain((0..ix.n).filter(|&i| cur.in_sel[i] && !ix.required[i]).map(Some))
        .collect();
    let insertable: Vec<Option<usize>> = std::iter::once(None)
        .chain((0..ix.n).filter(|&j| !cur.in_sel[j]).map(Some))
        .collect();
    let mut out = Vec::new();
    for &i in &removable {
        let drop = |w: usize| usize::from(i.is_some_and(|i| ix.pops[w].covers[i]));
        let needy: Vec<usize> = (0..ix.pops.len()).filter(|&w| cur.cover[w] - drop(w) < q).collect();
        if needy.iter().any(|&w| cur.cover[w] - drop(w) + 1 < q) {
            continue;
        }
        for &j in &insertable {
            if i.is_none() && j.is_none() {
                continue;
            }
            if !needy.iter().all(|&w| j.is_some_and(|j| ix.pops[w].covers[j])) {
                continue;
            }
            let mut min_after = 1.0f64;
            for (w, p) in ix.pops.iter().enumerate() {
                let mut s = cur.sum_a[w];
                if let Some(i) = i {
                    s -= p.a[i];
                }
                if let Some(j) = j {
                    s += p.a[j];
                }
                min_after = min_after.min(p.access_from_sum(s));
                if min_after < r - BOUND_TOL {
                    break;
                }
            }
            if min_after < r - BOUND_TOL {
                continue;
            }
            let delta_access = min_after - cur.min_access;
            let delta_cost = delta_cost_with(&cur.tour, |a, b| hat.get(a, b), i, j);
            if delta_cost > 0.0 && delta_access < 0.0 {
                continue;
            }
            if need_gain && delta_access <= 0.0 {
                continue;
            }
            let Ok(theta) = angle(delta_access, delta_cost) else {
                continue;
            };
            out.push(Move {
                remove: i,
                insert: j,
                delta_cost,
                delta_access,
                angle: theta,
            });
        }
    }
    out
}

fn compare_moves(a: &Move, b: &Move, rank: &[usize]) -> Ordering {
    let key = |o: Option<usize>| o.map(|v| rank[v]);
    a.angle
        .total_cmp(&b.angle)
        .then(a.delta_cost.total_cmp(&b.delta_cost))
        .then(key(a.remove).cmp(&key(b.remove)))
        .then(key(a.insert).cmp(&key(b.insert)))
}

fn id_ranks(ix: &Indexed<'_>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..ix.n).collect();
    order.sort_by(|&a, &b| ix.id(a).cmp(ix.id(b)));
    let mut rank = vec![0; ix.n];
    for (r, &v) in order.iter().enumerate() {
        rank[v] = r;
    }
    rank
}

/// Feasible moves from the selection visited by `tour` under bound `r` and
/// coverage `q`, with cost deltas estimated on `tour`.
pub fn feasible_swaps<S: AsRef<str>>(
    inst: &Instance,
    tour: &[S],
    r: f64,
    q: u32,
) -> Result<Vec<SwapCandidate>, DblpError> {
    let ix = inst.indexed()?;
    let idx = tour
        .iter()
        .map(|id| ix.index(id.as_ref()))
        .collect::<Result<Vec<_>, _>>()?;
    let cur = Incumbent::new(&ix, idx);
    let rank = id_ranks(&ix);
    let mut moves = scan(&ix, &cur, r, q as usize, false);
    moves.sort_by(|a, b| compare_moves(a, b, &rank));
    Ok(moves
        .into_iter()
        .map(|m| SwapCandidate {
            remove: m.remove.map(|i| ix.id(i).to_string()),
            insert: m.insert.map(|j| ix.id(j).to_string()),
            delta_cost: m.delta_cost,
            delta_access: m.delta_access,
            angle: m.angle,
        })
        .collect())
}

/// One pass of the main loop, for inspection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// Bound in force during the scan.
    pub r: f64,
    pub candidates: usize,
    /// Selection after the move.
    pub num_selected: usize,
    pub min_access: f64,
    pub coverage_ok: bool,
    pub revisit: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FrontierTrace {
    pub iterations: Vec<IterationRecord>,
    /// Set when the loop stopped without reaching the full selection.
    pub stalled: bool,
    pub tours_found: usize,
}

/// Approximate cost/access frontier. `epsilon` defaults to
/// [`epsilon_default`].
pub fn frontier(inst: &Instance, epsilon: Option<f64>) -> Result<Frontier, DblpError> {
    frontier_with_trace(inst, epsilon).map(|(f, _)| f)
}

pub fn frontier_with_trace(inst: &Instance, epsilon: Option<f64>) -> Result<(Frontier, FrontierTrace), DblpError> {
    let ix = inst.indexed()?;
    let eps = match epsilon {
        Some(e) if e > 0.0 && e.is_finite() => e,
        Some(e) => return Err(DblpError::InvalidArgument(format!("epsilon {e} must be positive"))),
        None => epsilon_default(inst)?,
    };
    let q = inst.q as usize;
    let rank = id_ranks(&ix);
    let first = initial_tour(&ix)?;
    let mut cur = Incumbent::new(&ix, first);
    let mut found: HashSet<Vec<usize>> = HashSet::new();
    found.insert(cur.tour.clone());
    let mut entries = vec![FrontierEntry {
        solution: ix.solution(&cur.tour),
        r_satisfied: 0.0,
    }];
    let mut states: HashSet<(Vec<usize>, u64)> = HashSet::new();
    let mut trace = FrontierTrace::default();
    let mut r = 0.0f64;
    let mut need_gain = false;
    let limit = 1000 + 100 * ix.n * ix.n;

    while cur.tour.len() < ix.n {
        if trace.iterations.len() >= limit {
            trace.stalled = true;
            break;
        }
        let moves = scan(&ix, &cur, r, q, need_gain);
        let Some(best) = moves.iter().min_by(|a, b| compare_moves(a, b, &rank)).copied() else {
            trace.stalled = true;
            break;
        };
        let mut selected: Vec<usize> = cur.tour.iter().copied().filter(|&v| Some(v) != best.remove).collect();
        selected.extend(best.insert);
        let tour = canonical_tour(&rebuild_tour(&selected, ix.costs(), ix.start), ix.start);
        let r_scan = r;
        cur = Incumbent::new(&ix, tour);
        let revisit = found.contains(&cur.tour);
        if revisit {
            r = cur.min_access;
        } else {
            r = cur.min_access.min(r + eps);
            found.insert(cur.tour.clone());
            entries.push(FrontierEntry {
                solution: ix.solution(&cur.tour),
                r_satisfied: r_scan,
            });
        }
        let mut key: Vec<usize> = cur.tour.clone();
        key.sort_unstable();
        need_gain = !states.insert((key, r.to_bits()));
        trace.iterations.push(IterationRecord {
            r: r_scan,
            candidates: moves.len(),
            num_selected: cur.tour.len(),
            min_access: cur.min_access,
            coverage_ok: cur.cover.iter().all(|&c| c >= q),
            revisit,
        });
    }
    trace.tours_found = entries.len();
    Ok((Frontier::from_entries(entries), trace))
}
