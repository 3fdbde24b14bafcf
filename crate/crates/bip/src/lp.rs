//! Dense bounded-variable dual simplex for the linear relaxation.
//!
//! Every structural column is boxed in `[0, 1]` (tightened to a fixed value by
//! branching), so the all-slack basis with each structural parked at the bound
//! matching the sign of its cost is always dual feasible. The solver therefore
//! never needs a primal phase: cold starts, added rows and bound fixings are all
//! handled by dual simplex pivots from a dual feasible basis.
//!
//! Column layout: structurals `0..n`, then one slack per row (`n + i`). A row
//! `a.x <= b` has slack in `[0, inf)`, `a.x >= b` in `(-inf, 0]`, `a.x = b` in
//! `[0, 0]`, and reads `a.x + s = b`.

use std::collections::HashSet;

use crate::{LinearRow, Sense};

const NONE: usize = usize::MAX;
const PIVOT_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-7;
const ZERO_TOL: f64 = 1e-12;
const REFACTOR_EVERY: usize = 1500;
/// Relative slack before a dual bound counts as past the cutoff; covers the
/// small dual infeasibilities the ratio test tolerates.
const CUTOFF_MARGIN: f64 = 1e-6;
/// Basic values beyond this signal a numerically broken tableau.
const BLOWUP: f64 = 1e9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { value: f64 },
    Infeasible,
    /// The bound provably exceeds the cutoff passed to
    /// [`Relaxation::solve_below`]; the optimum was not computed.
    Cutoff,
    /// Iteration limit or numerical trouble; no certified value.
    Stalled,
}

/// A basis that can be re-installed later, possibly after rows were appended.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisSnapshot {
    basis: Vec<u32>,
    at_upper: Vec<bool>,
}

#[derive(Clone, Debug)]
struct StoredRow {
    coefficients: Vec<(usize, f64)>,
    rhs: f64,
}

#[derive(Clone, Debug)]
pub struct Relaxation {
    n: usize,
    cost: Vec<f64>,
    base_lower: Vec<f64>,
    base_upper: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rows: Vec<StoredRow>,
    tab: Vec<Vec<f64>>,
    beta: Vec<f64>,
    dj: Vec<f64>,
    basis: Vec<usize>,
    row_of: Vec<usize>,
    at_upper: Vec<bool>,
    x_basic: Vec<f64>,
    pivots_since_refactor: usize,
    total_pivots: usize,
}

fn slack_bounds(sense: Sense) -> (f64, f64) {
    match sense {
        Sense::Le => (0.0, f64::INFINITY),
        Sense::Ge => (f64::NEG_INFINITY, 0.0),
        Sense::Eq => (0.0, 0.0),
    }
}

fn row_key(row: &LinearRow) -> (Vec<(usize, u64)>, Sense, u64) {
    (
        row.coefficients()
            .iter()
            .map(|&(i, c)| (i, c.to_bits()))
            .collect(),
        row.sense(),
        row.rhs().to_bits(),
    )
}

impl Relaxation {
    /// Builds the relaxation with an all-slack basis. Rows with a single
    /// nonzero become variable bounds, empty rows are checked and dropped,
    /// exact duplicates are merged. Returns `None` when this preprocessing
    /// already proves infeasibility.
    pub fn new(n: usize, objective: &[f64], rows: &[LinearRow]) -> Option<Self> {
        let mut base_lower = vec![0.0; n];
        let mut base_upper = vec![1.0; n];
        let mut kept: Vec<&LinearRow> = Vec::new();
        let mut seen = HashSet::new();
        for row in rows {
            match row.coefficients() {
                [] => {
                    if row.violation_at(0.0) > crate::FEASIBILITY_TOL {
                        return None;
                    }
                }
                [(j, a)] => {
                    let (j, a) = (*j, *a);
                    let t = row.rhs() / a;
                    let sense = if a < 0.0 {
                        match row.sense() {
                            Sense::Le => Sense::Ge,
                            Sense::Ge => Sense::Le,
                            Sense::Eq => Sense::Eq,
                        }
                    } else {
                        row.sense()
                    };
                    let tol = crate::FEASIBILITY_TOL / a.abs();
                    match sense {
                        Sense::Le => {
                            if t < 1.0 - tol {
                                base_upper[j] = 0.0;
                            }
                            if t < -tol {
                                return None;
                            }
                        }
                        Sense::Ge => {
                            if t > tol {
                                base_lower[j] = 1.0;
                            }
                            if t > 1.0 + tol {
                                return None;
                            }
                        }
                        Sense::Eq => {
                            if t.abs() <= tol {
                                base_upper[j] = 0.0;
                            } else if (t - 1.0).abs() <= tol {
                                base_lower[j] = 1.0;
                            } else {
                                return None;
                            }
                        }
                    }
                    if base_lower[j] > base_upper[j] {
                        return None;
                    }
                }
                _ => {
                    if seen.insert(row_key(row)) {
                        kept.push(row);
                    }
                }
            }
        }

        let mut cost = objective.to_vec();
        cost.resize(n, 0.0);
        let mut relaxation = Relaxation {
            n,
            cost,
            lower: base_lower.clone(),
            upper: base_upper.clone(),
            base_lower,
            base_upper,
            rows: Vec::new(),
            tab: Vec::new(),
            beta: Vec::new(),
            dj: Vec::new(),
            basis: Vec::new(),
            row_of: vec![NONE; n],
            at_upper: vec![false; n],
            x_basic: Vec::new(),
            pivots_since_refactor: 0,
            total_pivots: 0,
        };
        for row in kept {
            let (lo, up) = slack_bounds(row.sense());
            relaxation.lower.push(lo);
            relaxation.upper.push(up);
            relaxation.at_upper.push(row.sense() == Sense::Ge);
            relaxation.row_of.push(NONE);
            relaxation.rows.push(StoredRow {
                coefficients: row.coefficients().to_vec(),
                rhs: row.rhs(),
            });
        }
        relaxation.cold_start();
        Some(relaxation)
    }

    pub fn num_structural(&self) -> usize {
        self.n
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn total_pivots(&self) -> usize {
        self.total_pivots
    }

    fn ncols(&self) -> usize {
        self.n + self.rows.len()
    }

    fn value_of_nonbasic(&self, j: usize) -> f64 {
        if self.at_upper[j] {
            self.upper[j]
        } else {
            self.lower[j]
        }
    }

    /// Resets to the all-slack basis, structurals parked by cost sign.
    fn cold_start(&mut self) {
        let n = self.n;
        let m = self.rows.len();
        let ncols = n + m;
        self.tab = Vec::with_capacity(m);
        self.beta = Vec::with_capacity(m);
        for (i, row) in self.rows.iter().enumerate() {
            let mut t = vec![0.0; ncols];
            for &(j, c) in &row.coefficients {
                t[j] = c;
            }
            t[n + i] = 1.0;
            self.tab.push(t);
            self.beta.push(row.rhs);
        }
        self.dj = vec![0.0; ncols];
        self.dj[..n].copy_from_slice(&self.cost);
        self.basis = (n..ncols).collect();
        self.row_of = vec![NONE; ncols];
        for i in 0..m {
            self.row_of[n + i] = i;
        }
        for j in 0..n {
            self.at_upper[j] = self.cost[j] < 0.0;
        }
        for i in 0..m {
            // `>=` slacks live in (-inf, 0]
            self.at_upper[n + i] = self.lower[n + i].is_infinite();
        }
        self.pivots_since_refactor = 0;
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let inv = 1.0 / self.tab[r][q];
        let mut prow = std::mem::take(&mut self.tab[r]);
        let mut nz: Vec<usize> = Vec::with_capacity(prow.len());
        for (j, v) in prow.iter_mut().enumerate() {
            if *v != 0.0 {
                *v *= inv;
                if v.abs() < ZERO_TOL {
                    *v = 0.0;
                } else {
                    nz.push(j);
                }
            }
        }
        prow[q] = 1.0;
        self.beta[r] *= inv;
        let pb = self.beta[r];
        for i in 0..self.tab.len() {
            if i == r {
                continue;
            }
            let f = self.tab[i][q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.tab[i];
            for &j in &nz {
                let v = row[j] - f * prow[j];
                row[j] = if v.abs() < ZERO_TOL { 0.0 } else { v };
            }
            row[q] = 0.0;
            self.beta[i] -= f * pb;
        }
        let f = self.dj[q];
        if f != 0.0 {
            for &j in &nz {
                self.dj[j] -= f * prow[j];
            }
            self.dj[q] = 0.0;
        }
        self.tab[r] = prow;
        let leaving = self.basis[r];
        self.row_of[leaving] = NONE;
        self.basis[r] = q;
        self.row_of[q] = r;
        self.pivots_since_refactor += 1;
        self.total_pivots += 1;
    }

    fn compute_primal(&mut self) {
        let shifted: Vec<(usize, f64)> = (0..self.ncols())
            .filter(|&j| self.row_of[j] == NONE)
            .map(|j| (j, self.value_of_nonbasic(j)))
            .filter(|&(_, v)| v != 0.0)
            .collect();
        self.x_basic = self
            .tab
            .iter()
            .zip(&self.beta)
            .map(|(row, &b)| b - shifted.iter().map(|&(j, v)| row[j] * v).sum::<f64>())
            .collect();
    }

    /// Re-derives the bound position of boxed nonbasic structurals from the
    /// sign of their reduced cost. Returns false if a one-sided slack is dual
    /// infeasible, which only a new basis can repair.
    fn repair_dual(&mut self) -> bool {
        for j in 0..self.ncols() {
            if self.row_of[j] != NONE || self.lower[j] == self.upper[j] {
                continue;
            }
            let d = self.dj[j];
            if j < self.n {
                if d < 0.0 {
                    self.at_upper[j] = true;
                } else if d > 0.0 {
                    self.at_upper[j] = false;
                }
            } else if (self.at_upper[j] && d > DUAL_TOL) || (!self.at_upper[j] && d < -DUAL_TOL) {
                return false;
            }
        }
        true
    }

    /// Resets structural bounds to the program's own bounds plus `fixings`.
    /// Returns false on a contradictory fixing.
    pub fn apply_fixings(&mut self, fixings: &[(usize, bool)]) -> bool {
        self.lower[..self.n].copy_from_slice(&self.base_lower);
        self.upper[..self.n].copy_from_slice(&self.base_upper);
        for &(j, v) in fixings {
            let v = if v { 1.0 } else { 0.0 };
            if v < self.lower[j] || v > self.upper[j] {
                return false;
            }
            self.lower[j] = v;
            self.upper[j] = v;
        }
        true
    }

    pub fn add_row(&mut self, row: &LinearRow) {
        let n = self.n;
        let m = self.rows.len();
        let new_col = n + m;
        for t in &mut self.tab {
            t.push(0.0);
        }
        self.dj.push(0.0);
        let (lo, up) = slack_bounds(row.sense());
        self.lower.push(lo);
        self.upper.push(up);
        self.at_upper.push(row.sense() == Sense::Ge);
        self.row_of.push(m);

        let mut t = vec![0.0; new_col + 1];
        for &(j, c) in row.coefficients() {
            t[j] = c;
        }
        t[new_col] = 1.0;
        let mut b = row.rhs();
        for i in 0..m {
            let f = t[self.basis[i]];
            if f == 0.0 {
                continue;
            }
            let src = &self.tab[i];
            for (dst, &s) in t.iter_mut().zip(src.iter()) {
                if s != 0.0 {
                    *dst -= f * s;
                }
            }
            t[self.basis[i]] = 0.0;
            b -= f * self.beta[i];
        }
        for v in t.iter_mut() {
            if v.abs() < ZERO_TOL {
                *v = 0.0;
            }
        }
        t[new_col] = 1.0;
        self.tab.push(t);
        self.beta.push(b);
        self.basis.push(new_col);
        self.rows.push(StoredRow {
            coefficients: row.coefficients().to_vec(),
            rhs: row.rhs(),
        });
    }

    pub fn snapshot(&self) -> BasisSnapshot {
        BasisSnapshot {
            basis: self.basis.iter().map(|&b| b as u32).collect(),
            at_upper: self.at_upper.clone(),
        }
    }

    /// Installs `snap` (slacks of rows added since are basic). Falls back to a
    /// rebuild from the original rows, then to a cold start.
    pub fn restore(&mut self, snap: &BasisSnapshot) {
        let n = self.n;
        let mut target: Vec<usize> = snap.basis.iter().map(|&b| b as usize).collect();
        target.extend(n + snap.basis.len()..self.ncols());
        let mut in_target = vec![false; self.ncols()];
        for &v in &target {
            in_target[v] = true;
        }
        let mut ok = true;
        for &v in &target {
            if self.row_of[v] != NONE {
                continue;
            }
            match self.best_pivot_row(v, &in_target) {
                Some(r) => self.pivot(r, v),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok || self.pivots_since_refactor > REFACTOR_EVERY {
            ok = self.rebuild(&target, &in_target);
        }
        if !ok {
            self.cold_start();
            return;
        }
        let k = snap.at_upper.len();
        self.at_upper[..k].copy_from_slice(&snap.at_upper);
    }

    fn best_pivot_row(&self, v: usize, in_target: &[bool]) -> Option<usize> {
        let mut best = None;
        let mut best_abs = 1e-7;
        for (i, row) in self.tab.iter().enumerate() {
            if in_target[self.basis[i]] {
                continue;
            }
            let a = row[v].abs();
            if a > best_abs {
                best_abs = a;
                best = Some(i);
            }
        }
        best
    }

    /// Refactors from the stored rows into the basis `target`.
    fn rebuild(&mut self, target: &[usize], in_target: &[bool]) -> bool {
        let saved = self.at_upper.clone();
        self.cold_start();
        self.at_upper = saved;
        for &v in target {
            if self.row_of[v] != NONE {
                continue;
            }
            match self.best_pivot_row(v, in_target) {
                Some(r) => self.pivot(r, v),
                None => return false,
            }
        }
        self.pivots_since_refactor = 0;
        true
    }

    fn refactor_current(&mut self) -> bool {
        let target = self.basis.clone();
        let mut in_target = vec![false; self.ncols()];
        for &v in &target {
            in_target[v] = true;
        }
        self.rebuild(&target, &in_target)
    }

    /// Runs dual simplex from the current (dual feasible) basis.
    pub fn solve(&mut self) -> LpOutcome {
        self.solve_below(f64::INFINITY)
    }

    /// Like [`solve`](Self::solve), but gives up with
    /// [`LpOutcome::Cutoff`] once the dual objective, a valid lower bound
    /// at every dual feasible basis, clearly exceeds `cutoff`.
    pub fn solve_below(&mut self, cutoff: f64) -> LpOutcome {
        if self.pivots_since_refactor > REFACTOR_EVERY && !self.refactor_current() {
            self.cold_start();
        }
        if !self.repair_dual() {
            self.cold_start();
        }
        match self.dual_simplex(cutoff) {
            LpOutcome::Cutoff => return LpOutcome::Cutoff,
            LpOutcome::Optimal { value } => {
                if self.max_row_violation() <= crate::FEASIBILITY_TOL {
                    return LpOutcome::Optimal { value };
                }
            }
            LpOutcome::Infeasible => {
                if self.pivots_since_refactor < 50 {
                    return LpOutcome::Infeasible;
                }
                // Confirm on a freshly factored tableau.
                if self.refactor_current() && self.repair_dual() {
                    match self.dual_simplex(cutoff) {
                        LpOutcome::Infeasible => return LpOutcome::Infeasible,
                        LpOutcome::Cutoff => return LpOutcome::Cutoff,
                        _ => {}
                    }
                }
            }
            LpOutcome::Stalled => {}
        }
        // Numerical doubt: start clean once.
        self.cold_start();
        match self.dual_simplex(cutoff) {
            LpOutcome::Optimal { .. } if self.max_row_violation() > crate::FEASIBILITY_TOL => {
                LpOutcome::Stalled
            }
            other => other,
        }
    }

    fn dual_simplex(&mut self, cutoff: f64) -> LpOutcome {
        let limit = 50 * (self.ncols() + self.rows.len()) + 1000;
        let margin = CUTOFF_MARGIN * (1.0 + cutoff.abs());
        let mut refactored = false;
        for _ in 0..limit {
            self.compute_primal();
            if cutoff.is_finite() && self.objective_value() > cutoff + margin {
                return LpOutcome::Cutoff;
            }
            if self.x_basic.iter().any(|x| x.abs() > BLOWUP) {
                if refactored || !self.refactor_current() {
                    return LpOutcome::Stalled;
                }
                refactored = true;
                self.compute_primal();
            }
            let mut leave = None;
            let mut worst = 0.0;
            for (i, &x) in self.x_basic.iter().enumerate() {
                let v = self.basis[i];
                let lo = self.lower[v];
                let up = self.upper[v];
                let (d, increasing) = if x < lo - 1e-9 * (1.0 + lo.abs()) {
                    (lo - x, true)
                } else if x > up + 1e-9 * (1.0 + up.abs()) {
                    (x - up, false)
                } else {
                    continue;
                };
                let norm: f64 = self.tab[i][self.n..].iter().map(|a| a * a).sum();
                let score = d * d / norm.max(1e-12);
                if score > worst {
                    worst = score;
                    leave = Some((i, increasing));
                }
            }
            let Some((r, increasing)) = leave else {
                return LpOutcome::Optimal {
                    value: self.objective_value(),
                };
            };
            let row = &self.tab[r];
            let eligible = |j: usize, alpha: f64| {
                if alpha.abs() < PIVOT_TOL || self.row_of[j] != NONE || self.lower[j] == self.upper[j] {
                    return false;
                }
                if self.at_upper[j] {
                    increasing == (alpha > 0.0)
                } else {
                    increasing == (alpha < 0.0)
                }
            };
            // Harris ratio test: bound the step with relaxed reduced costs,
            // then take the largest pivot within that bound.
            let mut bound = f64::INFINITY;
            for (j, &alpha) in row.iter().enumerate() {
                if eligible(j, alpha) {
                    bound = bound.min((self.dj[j].abs() + DUAL_TOL) / alpha.abs());
                }
            }
            let mut enter = None;
            let mut best_alpha = 0.0;
            for (j, &alpha) in row.iter().enumerate() {
                if eligible(j, alpha) && self.dj[j].abs() / alpha.abs() <= bound && alpha.abs() > best_alpha {
                    best_alpha = alpha.abs();
                    enter = Some(j);
                }
            }
            let Some(q) = enter else {
                return LpOutcome::Infeasible;
            };
            let leaving = self.basis[r];
            self.pivot(r, q);
            self.at_upper[leaving] = !increasing;
        }
        LpOutcome::Stalled
    }

    fn objective_value(&self) -> f64 {
        (0..self.n)
            .map(|j| {
                let x = if self.row_of[j] == NONE {
                    self.value_of_nonbasic(j)
                } else {
                    self.x_basic[self.row_of[j]]
                };
                self.cost[j] * x
            })
            .sum()
    }

    /// Structural values at the current basis.
    pub fn values(&self) -> Vec<f64> {
        (0..self.n)
            .map(|j| {
                if self.row_of[j] == NONE {
                    self.value_of_nonbasic(j)
                } else {
                    self.x_basic[self.row_of[j]]
                }
            })
            .collect()
    }

    fn max_row_violation(&self) -> f64 {
        let x = self.values();
        let bounds = x
            .iter()
            .enumerate()
            .map(|(j, &v)| (self.lower[j] - v).max(v - self.upper[j]).max(0.0))
            .fold(0.0, f64::max);
        self.rows
            .iter()
            .zip(0..)
            .map(|(row, i)| {
                let act: f64 = row.coefficients.iter().map(|&(j, c)| c * x[j]).sum();
                let slack_lo = self.lower[self.n + i];
                let slack_up = self.upper[self.n + i];
                // act + s = rhs with s in [lo, up]  <=>  rhs - up <= act <= rhs - lo
                let lo = row.rhs - slack_up;
                let up = row.rhs - slack_lo;
                let scale = 1.0 + row.rhs.abs();
                ((lo - act).max(act - up).max(0.0)) / scale
            })
            .fold(bounds, f64::max)
    }

    /// Bound from the objective alone: every free variable at its cheaper value.
    pub fn fallback_bound(&self) -> f64 {
        (0..self.n)
            .map(|j| (self.cost[j] * self.lower[j]).min(self.cost[j] * self.upper[j]))
            .sum()
    }

    pub fn structural_bounds(&self, j: usize) -> (f64, f64) {
        (self.lower[j], self.upper[j])
    }
}
