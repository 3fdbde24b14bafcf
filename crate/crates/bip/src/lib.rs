//! Exact branch-and-bound solver for minimization binary integer programs.
//!
//! A [`BinaryProgram`] is a linear objective over `num_vars` binary variables,
//! a list of [`LinearRow`]s, and an optional [`Separator`] that is consulted
//! whenever the search reaches an integral candidate. Rows returned by the
//! separator are added globally and the candidate node is re-bounded, so the
//! reported optimum is certified against every row the separator could ever
//! produce for it.
//!
//! Bounds come from the linear relaxation, solved with a dense bounded dual
//! simplex ([`lp`]) that is warm-started across nodes and across added rows.

pub mod lp;
mod search;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use search::solve;

/// Absolute tolerance for treating a relaxation value as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;
/// Absolute tolerance for row feasibility.
pub const FEASIBILITY_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BipError {
    #[error("row references variable {index} but the program has {num_vars} variables")]
    VariableOutOfRange { index: usize, num_vars: usize },
    #[error("coefficient for variable {index} is not finite")]
    NonFinite { index: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        })
    }
}

/// A sparse linear constraint `sum(coef * x) <sense> rhs`.
///
/// Indices are kept strictly increasing and zero coefficients are never
/// stored; duplicate indices passed to [`LinearRow::new`] are summed.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearRow {
    coefficients: Vec<(usize, f64)>,
    sense: Sense,
    rhs: f64,
}

impl LinearRow {
    pub fn new<I>(terms: I, sense: Sense, rhs: f64) -> Self
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let mut coefficients: Vec<(usize, f64)> = terms.into_iter().collect();
        coefficients.sort_by_key(|&(i, _)| i);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(coefficients.len());
        for (i, c) in coefficients {
            match merged.last_mut() {
                Some((j, acc)) if *j == i => *acc += c,
                _ => merged.push((i, c)),
            }
        }
        merged.retain(|&(_, c)| c != 0.0);
        LinearRow {
            coefficients: merged,
            sense,
            rhs,
        }
    }

    pub fn coefficients(&self) -> &[(usize, f64)] {
        &self.coefficients
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn rhs(&self) -> f64 {
        self.rhs
    }

    pub fn activity(&self, values: &[f64]) -> f64 {
        self.coefficients.iter().map(|&(i, c)| c * values[i]).sum()
    }

    pub fn activity_binary(&self, assignment: &[bool]) -> f64 {
        self.coefficients
            .iter()
            .filter(|&&(i, _)| assignment[i])
            .map(|&(_, c)| c)
            .sum()
    }

    /// Amount by which `activity` violates the row (zero when satisfied).
    pub fn violation_at(&self, activity: f64) -> f64 {
        match self.sense {
            Sense::Le => (activity - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - activity).max(0.0),
            Sense::Eq => (activity - self.rhs).abs(),
        }
    }

    pub fn violation(&self, values: &[f64]) -> f64 {
        self.violation_at(self.activity(values))
    }

    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        self.violation_at(self.activity_binary(assignment)) <= FEASIBILITY_TOL
    }

    fn max_index(&self) -> Option<usize> {
        self.coefficients.last().map(|&(i, _)| i)
    }
}

/// Supplies rows lazily. Implementations receive immutable views only and
/// must be callable from several threads.
pub trait Separator: Send + Sync {
    /// Called on every integral candidate. Must return an empty list iff the
    /// candidate violates none of the rows this separator represents; any
    /// returned row must be violated by `assignment`.
    fn separate(&self, assignment: &[bool]) -> Vec<LinearRow>;

    /// Optional separation on fractional relaxation points. Returned rows must
    /// be valid for every feasible integral assignment.
    fn separate_fractional(&self, _values: &[f64]) -> Vec<LinearRow> {
        Vec::new()
    }
}

#[derive(Clone)]
pub struct BinaryProgram {
    num_vars: usize,
    objective: Vec<f64>,
    rows: Vec<LinearRow>,
    separator: Option<Arc<dyn Separator>>,
    priority: Vec<u8>,
}

impl fmt::Debug for BinaryProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BinaryProgram")
            .field("num_vars", &self.num_vars)
            .field("objective", &self.objective)
            .field("rows", &self.rows)
            .field("separator", &self.separator.is_some())
            .field("priority", &self.priority)
            .finish()
    }
}

impl BinaryProgram {
    pub fn new(num_vars: usize) -> Self {
        BinaryProgram {
            num_vars,
            objective: vec![0.0; num_vars],
            rows: Vec::new(),
            separator: None,
            priority: vec![0; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn rows(&self) -> &[LinearRow] {
        &self.rows
    }

    pub fn separator(&self) -> Option<&Arc<dyn Separator>> {
        self.separator.as_ref()
    }

    pub fn set_objective(&mut self, var: usize, coef: f64) -> Result<(), BipError> {
        if var >= self.num_vars {
            return Err(BipError::VariableOutOfRange {
                index: var,
                num_vars: self.num_vars,
            });
        }
        if !coef.is_finite() {
            return Err(BipError::NonFinite { index: var });
        }
        self.objective[var] = coef;
        Ok(())
    }

    pub fn add_row(&mut self, row: LinearRow) -> Result<(), BipError> {
        self.check_row(&row)?;
        self.rows.push(row);
        Ok(())
    }

    pub fn set_separator(&mut self, separator: Arc<dyn Separator>) {
        self.separator = Some(separator);
    }

    /// Branching prefers fractional variables of higher priority (default 0).
    pub fn set_branch_priority(&mut self, var: usize, priority: u8) -> Result<(), BipError> {
        if var >= self.num_vars {
            return Err(BipError::VariableOutOfRange {
                index: var,
                num_vars: self.num_vars,
            });
        }
        self.priority[var] = priority;
        Ok(())
    }

    pub fn branch_priority(&self) -> &[u8] {
        &self.priority
    }

    pub(crate) fn check_row(&self, row: &LinearRow) -> Result<(), BipError> {
        if let Some(i) = row.max_index() {
            if i >= self.num_vars {
                return Err(BipError::VariableOutOfRange {
                    index: i,
                    num_vars: self.num_vars,
                });
            }
        }
        if let Some(&(i, _)) = row.coefficients.iter().find(|(_, c)| !c.is_finite()) {
            return Err(BipError::NonFinite { index: i });
        }
        if !row.rhs.is_finite() {
            return Err(BipError::NonFinite { index: usize::MAX });
        }
        Ok(())
    }

    pub fn objective_value(&self, assignment: &[bool]) -> f64 {
        self.objective
            .iter()
            .zip(assignment)
            .filter(|(_, &on)| on)
            .map(|(&c, _)| c)
            .sum()
    }

    /// True when `assignment` satisfies every stored row.
    pub fn is_feasible(&self, assignment: &[bool]) -> bool {
        self.rows.iter().all(|r| r.is_satisfied_by(assignment))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    NodeLimit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub status: Status,
    /// Present iff `status == Optimal`.
    pub assignment: Option<Vec<bool>>,
    pub objective_value: Option<f64>,
    /// Best separator-clean assignment seen when the node limit stopped the search.
    pub incumbent: Option<(Vec<bool>, f64)>,
    pub nodes_explored: usize,
    pub lazy_rows_added: usize,
}

/// Lower bound on the best completion of `fixed` (one entry per variable,
/// `None` = free) using the linear relaxation of the stored rows.
///
/// Returns `f64::INFINITY` when the relaxation is infeasible.
pub fn relax_bound(bp: &BinaryProgram, fixed: &[Option<bool>]) -> f64 {
    assert_eq!(fixed.len(), bp.num_vars, "one fixing entry per variable");
    let mut relaxation = match lp::Relaxation::new(bp.num_vars, &bp.objective, &bp.rows) {
        Some(r) => r,
        None => return f64::INFINITY,
    };
    let fixings: Vec<(usize, bool)> = fixed
        .iter()
        .enumerate()
        .filter_map(|(i, f)| f.map(|v| (i, v)))
        .collect();
    if !relaxation.apply_fixings(&fixings) {
        return f64::INFINITY;
    }
    match relaxation.solve() {
        lp::LpOutcome::Optimal { value } => value,
        lp::LpOutcome::Infeasible => f64::INFINITY,
        lp::LpOutcome::Stalled | lp::LpOutcome::Cutoff => relaxation.fallback_bound(),
    }
}
