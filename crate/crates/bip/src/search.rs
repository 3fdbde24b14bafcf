//! Best-first branch and bound over the LP relaxation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::lp::{BasisSnapshot, LpOutcome, Relaxation};
use crate::{BinaryProgram, LinearRow, SolveResult, Status, FEASIBILITY_TOL, INTEGRALITY_TOL};

/// Rounds of fractional separation at the root. Deeper nodes only separate
/// integral candidates, which keeps the relaxation small.
const ROOT_SEPARATION_ROUNDS: usize = 25;

struct Node {
    bound: f64,
    seq: u64,
    fixings: Vec<(usize, bool)>,
    basis: Option<BasisSnapshot>,
    branch_var: usize,
    /// Fractional part of the branching variable at this node's relaxation.
    branch_frac: f64,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // BinaryHeap is a max-heap: the smallest bound, then the oldest node, wins.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

enum Evaluation {
    Infeasible,
    /// Relaxation optimum is integral and separator-clean.
    Integral { assignment: Vec<bool>, value: f64 },
    Fractional { bound: f64, branch_var: usize, branch_frac: f64, basis: Option<BasisSnapshot> },
    /// Bound already reaches the incumbent.
    Pruned,
}

struct Search<'a> {
    bp: &'a BinaryProgram,
    lp: Relaxation,
    rows: Vec<LinearRow>,
    incumbent: Option<(Vec<bool>, f64)>,
    lazy_rows_added: usize,
    pseudo: Pseudocosts,
}

fn prune_tol(incumbent: f64) -> f64 {
    1e-6 + 1e-12 * incumbent.abs()
}

impl Search<'_> {
    fn cutoff(&self) -> f64 {
        match &self.incumbent {
            Some((_, v)) => v - prune_tol(*v),
            None => f64::INFINITY,
        }
    }

    fn add_rows(&mut self, rows: Vec<LinearRow>) {
        for row in rows {
            self.bp
                .check_row(&row)
                .expect("separator returned a row outside the program");
            self.lp.add_row(&row);
            self.rows.push(row);
        }
    }

    fn evaluate(&mut self, fixings: &[(usize, bool)], basis: Option<&BasisSnapshot>) -> Evaluation {
        if let Some(b) = basis {
            self.lp.restore(b);
        }
        if !self.lp.apply_fixings(fixings) {
            return Evaluation::Infeasible;
        }
        let mut fractional_rounds = 0;
        loop {
            let bound = match self.lp.solve_below(self.cutoff()) {
                LpOutcome::Infeasible => return Evaluation::Infeasible,
                LpOutcome::Cutoff => return Evaluation::Pruned,
                LpOutcome::Optimal { value } => value,
                LpOutcome::Stalled => {
                    let bound = self.lp.fallback_bound();
                    if bound >= self.cutoff() {
                        return Evaluation::Pruned;
                    }
                    let branch_var = (0..self.bp.num_vars)
                        .find(|&j| {
                            let (lo, up) = self.lp.structural_bounds(j);
                            lo < up
                        });
                    return match branch_var {
                        Some(branch_var) => Evaluation::Fractional {
                            bound,
                            branch_var,
                            branch_frac: 0.5,
                            basis: None,
                        },
                        None => self.integral_candidate(&self.fixed_assignment()),
                    };
                }
            };
            if bound >= self.cutoff() {
                return Evaluation::Pruned;
            }
            let values = self.lp.values();
            match self.pseudo.choose(&values, &self.bp.priority) {
                None => {
                    let assignment: Vec<bool> = values.iter().map(|&v| v > 0.5).collect();
                    if !self.rows.iter().all(|r| r.is_satisfied_by(&assignment)) {
                        // The rounded point drifted off a row; give branching a chance.
                        if let Some(j) = (0..values.len()).find(|&j| {
                            let (lo, up) = self.lp.structural_bounds(j);
                            lo < up
                        }) {
                            return Evaluation::Fractional {
                                bound,
                                branch_var: j,
                                branch_frac: 0.5,
                                basis: Some(self.lp.snapshot()),
                            };
                        }
                        return Evaluation::Infeasible;
                    }
                    let cuts = match self.bp.separator() {
                        Some(sep) => sep.separate(&assignment),
                        None => Vec::new(),
                    };
                    if cuts.is_empty() {
                        let value = self.bp.objective_value(&assignment);
                        return Evaluation::Integral { assignment, value };
                    }
                    assert!(
                        cuts.iter().any(|r| !r.is_satisfied_by(&assignment)),
                        "separator returned rows that the candidate satisfies"
                    );
                    self.lazy_rows_added += cuts.len();
                    self.add_rows(cuts);
                }
                Some((branch_var, branch_frac)) => {
                    if fixings.is_empty() && fractional_rounds < ROOT_SEPARATION_ROUNDS {
                        if let Some(sep) = self.bp.separator() {
                            let cuts: Vec<LinearRow> = sep
                                .separate_fractional(&values)
                                .into_iter()
                                .filter(|r| r.violation(&values) > 1e-4)
                                .collect();
                            if !cuts.is_empty() {
                                fractional_rounds += 1;
                                self.add_rows(cuts);
                                continue;
                            }
                        }
                    }
                    return Evaluation::Fractional {
                        bound,
                        branch_var,
                        branch_frac,
                        basis: Some(self.lp.snapshot()),
                    };
                }
            }
        }
    }

    fn fixed_assignment(&self) -> Vec<bool> {
        (0..self.bp.num_vars)
            .map(|j| self.lp.structural_bounds(j).0 > 0.5)
            .collect()
    }

    fn integral_candidate(&mut self, assignment: &[bool]) -> Evaluation {
        if !self.rows.iter().all(|r| r.is_satisfied_by(assignment)) {
            return Evaluation::Infeasible;
        }
        if let Some(sep) = self.bp.separator() {
            let cuts = sep.separate(assignment);
            if !cuts.is_empty() {
                self.lazy_rows_added += cuts.len();
                self.add_rows(cuts);
                return Evaluation::Infeasible;
            }
        }
        Evaluation::Integral {
            assignment: assignment.to_vec(),
            value: self.bp.objective_value(assignment),
        }
    }

    fn offer(&mut self, assignment: Vec<bool>, value: f64) {
        let better = match &self.incumbent {
            Some((_, v)) => value < *v,
            None => true,
        };
        if better {
            self.incumbent = Some((assignment, value));
        }
    }
}

/// Average bound gain per unit change of each variable, per direction
/// (`0` down, `1` up), learned from evaluated children.
struct Pseudocosts {
    sum: [Vec<f64>; 2],
    count: [Vec<u32>; 2],
}

impl Pseudocosts {
    fn new(n: usize) -> Self {
        Pseudocosts {
            sum: [vec![0.0; n], vec![0.0; n]],
            count: [vec![0; n], vec![0; n]],
        }
    }

    fn record(&mut self, var: usize, up: bool, gain: f64) {
        let d = usize::from(up);
        self.sum[d][var] += gain;
        self.count[d][var] += 1;
    }

    fn estimate(&self, d: usize, var: usize, fallback: f64) -> f64 {
        match self.count[d][var] {
            0 => fallback,
            c => self.sum[d][var] / f64::from(c),
        }
    }

    fn mean(&self, d: usize) -> f64 {
        let (s, c) = self.count[d]
            .iter()
            .zip(&self.sum[d])
            .filter(|(&c, _)| c > 0)
            .fold((0.0, 0u32), |(s, n), (&c, &v)| (s + v / f64::from(c), n + 1));
        if c == 0 {
            1.0
        } else {
            s / f64::from(c)
        }
    }

    /// Fractional variable of the highest branching priority with the best
    /// product of estimated down and up gains; variables never branched on
    /// borrow the average estimate. Ties go to the value nearest 1/2, then
    /// the lowest index. Returns the variable and its fractional part.
    fn choose(&self, values: &[f64], priority: &[u8]) -> Option<(usize, f64)> {
        let fallback = [self.mean(0), self.mean(1)];
        let mut best: Option<(u8, f64, f64, usize, f64)> = None;
        for (j, &v) in values.iter().enumerate() {
            let frac = v - v.floor();
            if frac <= INTEGRALITY_TOL || frac >= 1.0 - INTEGRALITY_TOL {
                continue;
            }
            let p = priority[j];
            let down = (self.estimate(0, j, fallback[0]) * frac).max(1e-6);
            let up = (self.estimate(1, j, fallback[1]) * (1.0 - frac)).max(1e-6);
            let score = down * up;
            let dist = (frac - 0.5).abs();
            let better = match best {
                None => true,
                Some((bp, bs, bd, _, _)) => p > bp || (p == bp && (score > bs || (score == bs && dist < bd))),
            };
            if better {
                best = Some((p, score, dist, j, frac));
            }
        }
        best.map(|(_, _, _, j, frac)| (j, frac))
    }
}

/// Solves `bp` to certified optimality (or until `node_limit` relaxations
/// have been evaluated). Deterministic for identical inputs.
pub fn solve(bp: &BinaryProgram, node_limit: Option<usize>) -> SolveResult {
    let infeasible = |nodes, lazy| SolveResult {
        status: Status::Infeasible,
        assignment: None,
        objective_value: None,
        incumbent: None,
        nodes_explored: nodes,
        lazy_rows_added: lazy,
    };
    let Some(lp) = Relaxation::new(bp.num_vars, &bp.objective, &bp.rows) else {
        return infeasible(0, 0);
    };
    let mut search = Search {
        bp,
        lp,
        rows: bp.rows.clone(),
        incumbent: None,
        lazy_rows_added: 0,
        pseudo: Pseudocosts::new(bp.num_vars),
    };
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    let mut nodes = 1usize;

    match search.evaluate(&[], None) {
        Evaluation::Infeasible | Evaluation::Pruned => return infeasible(nodes, search.lazy_rows_added),
        Evaluation::Integral { assignment, value } => search.offer(assignment, value),
        Evaluation::Fractional {
            bound,
            branch_var,
            branch_frac,
            basis,
        } => heap.push(Node {
            bound,
            seq,
            fixings: Vec::new(),
            basis,
            branch_var,
            branch_frac,
        }),
    }

    let mut hit_limit = false;
    while let Some(node) = heap.pop() {
        if node.bound >= search.cutoff() {
            continue;
        }
        if let Some(limit) = node_limit {
            if nodes >= limit {
                hit_limit = true;
                break;
            }
        }
        for value in [true, false] {
            let mut fixings = node.fixings.clone();
            fixings.push((node.branch_var, value));
            nodes += 1;
            let evaluation = search.evaluate(&fixings, node.basis.as_ref());
            let child_bound = match &evaluation {
                Evaluation::Integral { value, .. } => Some(*value),
                Evaluation::Fractional { bound, .. } => Some(*bound),
                Evaluation::Infeasible | Evaluation::Pruned => None,
            };
            if let Some(b) = child_bound {
                let step = if value { 1.0 - node.branch_frac } else { node.branch_frac };
                search.pseudo.record(node.branch_var, value, (b - node.bound).max(0.0) / step);
            }
            match evaluation {
                Evaluation::Infeasible | Evaluation::Pruned => {}
                Evaluation::Integral { assignment, value } => search.offer(assignment, value),
                Evaluation::Fractional {
                    bound,
                    branch_var,
                    branch_frac,
                    basis,
                } => {
                    seq += 1;
                    heap.push(Node {
                        bound: bound.max(node.bound),
                        seq,
                        fixings,
                        basis,
                        branch_var,
                        branch_frac,
                    });
                }
            }
        }
    }

    let lazy_rows_added = search.lazy_rows_added;
    match (hit_limit, search.incumbent) {
        (true, incumbent) => SolveResult {
            status: Status::NodeLimit,
            assignment: None,
            objective_value: None,
            incumbent,
            nodes_explored: nodes,
            lazy_rows_added,
        },
        (false, Some((assignment, value))) => {
            debug_assert!(search.rows.iter().all(|r| r.violation_at(r.activity_binary(&assignment)) <= FEASIBILITY_TOL));
            SolveResult {
                status: Status::Optimal,
                assignment: Some(assignment),
                objective_value: Some(value),
                incumbent: None,
                nodes_explored: nodes,
                lazy_rows_added,
            }
        }
        (false, None) => infeasible(nodes, lazy_rows_added),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Sense, Separator};
    use std::sync::Arc;

    #[test]
    fn cheaper_variable_covers() {
        let mut bp = BinaryProgram::new(2);
        bp.set_objective(0, 1.0).unwrap();
        bp.set_objective(1, 2.0).unwrap();
        bp.add_row(LinearRow::new([(0, 1.0), (1, 1.0)], Sense::Ge, 1.0)).unwrap();
        let res = solve(&bp, None);
        assert_eq!(res.status, Status::Optimal);
        assert_eq!(res.assignment, Some(vec![true, false]));
        assert_eq!(res.objective_value, Some(1.0));
    }

    #[test]
    fn contradictory_bounds_are_infeasible() {
        let mut bp = BinaryProgram::new(1);
        bp.add_row(LinearRow::new([(0, 1.0)], Sense::Ge, 1.0)).unwrap();
        bp.add_row(LinearRow::new([(0, 1.0)], Sense::Le, 0.0)).unwrap();
        let res = solve(&bp, None);
        assert_eq!(res.status, Status::Infeasible);
        assert!(res.assignment.is_none());
    }

    struct NotAllOnes;

    impl Separator for NotAllOnes {
        fn separate(&self, assignment: &[bool]) -> Vec<LinearRow> {
            if assignment.iter().all(|&b| b) {
                vec![LinearRow::new([(0, 1.0), (1, 1.0), (2, 1.0)], Sense::Le, 2.0)]
            } else {
                Vec::new()
            }
        }
    }

    #[test]
    fn lazy_row_cuts_off_all_ones() {
        let mut bp = BinaryProgram::new(3);
        for j in 0..3 {
            bp.set_objective(j, -1.0).unwrap();
        }
        bp.set_separator(Arc::new(NotAllOnes));
        let res = solve(&bp, None);
        assert_eq!(res.status, Status::Optimal);
        assert_eq!(res.objective_value, Some(-2.0));
        assert_eq!(res.lazy_rows_added, 1);
        assert_eq!(res.assignment.as_ref().unwrap().iter().filter(|&&b| b).count(), 2);
    }

    #[test]
    fn node_limit_reports_incumbent_separately() {
        // Knapsack-like program that needs branching.
        let mut bp = BinaryProgram::new(6);
        let w = [3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
        for (j, &wj) in w.iter().enumerate() {
            bp.set_objective(j, -(wj + 0.5)).unwrap();
        }
        bp.add_row(LinearRow::new(w.iter().enumerate().map(|(j, &v)| (j, v)), Sense::Le, 16.5)).unwrap();
        let res = solve(&bp, Some(1));
        assert_eq!(res.status, Status::NodeLimit);
        assert!(res.assignment.is_none());
        let full = solve(&bp, None);
        assert_eq!(full.status, Status::Optimal);
    }
}
