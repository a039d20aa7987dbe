//! A conventional finite-domain solver: bounds propagation to fixpoint plus
//! depth-first branch-and-bound.
//!
//! Search order is static — variables in declaration order, values ascending,
//! branching `x = lo` versus `x ≥ lo + 1` — so runs are fully deterministic:
//! identical solutions and identical node counts every time.

use thiserror::Error;

use crate::flat::{FlatConstraint, FlatCsp, LinOp, VarId};
use crate::model::Sense;
use crate::rational::Rational;

/// Raised when propagation empties a domain.
#[derive(Debug, Clone, Copy, Error, PartialEq, Eq)]
#[error("inconsistency")]
pub struct Inconsistency;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CheckError {
    #[error("MISSING_VAR: assignment covers {got} of {want} variables")]
    MissingVar { got: usize, want: usize },
}

/// Current inclusive interval per variable. A store whose intervals are all
/// non-empty is live; propagation fails instead of storing an empty interval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainStore {
    bounds: Vec<(i64, i64)>,
}

impl DomainStore {
    pub fn from_csp(csp: &FlatCsp) -> DomainStore {
        DomainStore {
            bounds: csp.vars.clone(),
        }
    }

    pub fn lo(&self, v: VarId) -> i64 {
        self.bounds[v.0].0
    }

    pub fn hi(&self, v: VarId) -> i64 {
        self.bounds[v.0].1
    }

    pub fn is_fixed(&self, v: VarId) -> bool {
        let (lo, hi) = self.bounds[v.0];
        lo == hi
    }

    pub fn is_failed(&self) -> bool {
        self.bounds.iter().any(|(lo, hi)| lo > hi)
    }

    fn tighten_lo(&mut self, v: VarId, lo: i64) -> Result<bool, Inconsistency> {
        let entry = &mut self.bounds[v.0];
        if lo > entry.0 {
            entry.0 = lo;
            if entry.0 > entry.1 {
                return Err(Inconsistency);
            }
            return Ok(true);
        }
        Ok(false)
    }

    fn tighten_hi(&mut self, v: VarId, hi: i64) -> Result<bool, Inconsistency> {
        let entry = &mut self.bounds[v.0];
        if hi < entry.1 {
            entry.1 = hi;
            if entry.0 > entry.1 {
                return Err(Inconsistency);
            }
            return Ok(true);
        }
        Ok(false)
    }

    fn fix(&mut self, v: VarId, value: i64) -> Result<bool, Inconsistency> {
        let a = self.tighten_lo(v, value)?;
        let b = self.tighten_hi(v, value)?;
        Ok(a || b)
    }
}

fn div_floor(p: i64, q: i64) -> i64 {
    debug_assert!(q > 0);
    p.div_euclid(q)
}

fn div_ceil(p: i64, q: i64) -> i64 {
    debug_assert!(q > 0);
    -(-p).div_euclid(q)
}

/// Minimum value `a·x` can take over `x`'s interval.
fn term_min(a: i64, lo: i64, hi: i64) -> i64 {
    if a >= 0 {
        a * lo
    } else {
        a * hi
    }
}

fn term_max(a: i64, lo: i64, hi: i64) -> i64 {
    if a >= 0 {
        a * hi
    } else {
        a * lo
    }
}

fn sum_bounds(terms: &[(i64, VarId)], store: &DomainStore) -> (i64, i64) {
    let mut lo = 0;
    let mut hi = 0;
    for &(a, x) in terms {
        lo += term_min(a, store.lo(x), store.hi(x));
        hi += term_max(a, store.lo(x), store.hi(x));
    }
    (lo, hi)
}

/// Bounds propagation for `Σ a·x ≤ rhs`: each variable's bound is tightened
/// against the residual slack of the others.
fn propagate_lin_le(
    terms: &[(i64, VarId)],
    rhs: i64,
    store: &mut DomainStore,
) -> Result<bool, Inconsistency> {
    let sum_min: i64 = terms
        .iter()
        .map(|&(a, x)| term_min(a, store.lo(x), store.hi(x)))
        .sum();
    if sum_min > rhs {
        return Err(Inconsistency);
    }
    let slack = rhs - sum_min;
    let mut changed = false;
    for &(a, x) in terms {
        if a == 0 {
            continue;
        }
        let min_j = term_min(a, store.lo(x), store.hi(x));
        let bound = min_j + slack; // a·x ≤ bound
        if a > 0 {
            changed |= store.tighten_hi(x, div_floor(bound, a))?;
        } else {
            changed |= store.tighten_lo(x, div_ceil(-bound, -a))?;
        }
    }
    Ok(changed)
}

fn negated(terms: &[(i64, VarId)]) -> Vec<(i64, VarId)> {
    terms.iter().map(|&(a, x)| (-a, x)).collect()
}

fn propagate_lin(
    op: LinOp,
    terms: &[(i64, VarId)],
    rhs: i64,
    store: &mut DomainStore,
) -> Result<bool, Inconsistency> {
    match op {
        LinOp::Le => propagate_lin_le(terms, rhs, store),
        LinOp::Eq => {
            let a = propagate_lin_le(terms, rhs, store)?;
            let b = propagate_lin_le(&negated(terms), -rhs, store)?;
            Ok(a || b)
        }
    }
}

/// Reified propagation in both directions: entailment fixes `b`; a fixed `b`
/// imposes the linear constraint or its negation.
fn propagate_reif(
    b: VarId,
    op: LinOp,
    terms: &[(i64, VarId)],
    rhs: i64,
    store: &mut DomainStore,
) -> Result<bool, Inconsistency> {
    let mut changed = false;
    let (sum_lo, sum_hi) = sum_bounds(terms, store);
    match op {
        LinOp::Le => {
            if sum_hi <= rhs {
                changed |= store.tighten_lo(b, 1)?;
            } else if sum_lo > rhs {
                changed |= store.tighten_hi(b, 0)?;
            }
        }
        LinOp::Eq => {
            if sum_lo == rhs && sum_hi == rhs {
                changed |= store.tighten_lo(b, 1)?;
            } else if rhs < sum_lo || rhs > sum_hi {
                changed |= store.tighten_hi(b, 0)?;
            }
        }
    }
    if store.lo(b) == 1 {
        changed |= propagate_lin(op, terms, rhs, store)?;
    } else if store.hi(b) == 0 {
        match op {
            // ¬(Σ ≤ rhs)  ⇔  Σ ≥ rhs + 1
            LinOp::Le => changed |= propagate_lin_le(&negated(terms), -(rhs + 1), store)?,
            // ¬(Σ = rhs): only refutable once the sum is pinned.
            LinOp::Eq => {
                let (lo, hi) = sum_bounds(terms, store);
                if lo == hi && lo == rhs {
                    return Err(Inconsistency);
                }
            }
        }
    }
    Ok(changed)
}

fn propagate_min(y: VarId, xs: &[VarId], store: &mut DomainStore) -> Result<bool, Inconsistency> {
    let mut changed = false;
    let min_lo = xs.iter().map(|&x| store.lo(x)).min().expect("non-empty");
    let min_hi = xs.iter().map(|&x| store.hi(x)).min().expect("non-empty");
    changed |= store.tighten_lo(y, min_lo)?;
    changed |= store.tighten_hi(y, min_hi)?;
    let y_lo = store.lo(y);
    for &x in xs {
        changed |= store.tighten_lo(x, y_lo)?;
    }
    Ok(changed)
}

fn propagate_max(y: VarId, xs: &[VarId], store: &mut DomainStore) -> Result<bool, Inconsistency> {
    let mut changed = false;
    let max_lo = xs.iter().map(|&x| store.lo(x)).max().expect("non-empty");
    let max_hi = xs.iter().map(|&x| store.hi(x)).max().expect("non-empty");
    changed |= store.tighten_lo(y, max_lo)?;
    changed |= store.tighten_hi(y, max_hi)?;
    let y_hi = store.hi(y);
    for &x in xs {
        changed |= store.tighten_hi(x, y_hi)?;
    }
    Ok(changed)
}

fn propagate_constraint(
    constraint: &FlatConstraint,
    store: &mut DomainStore,
) -> Result<bool, Inconsistency> {
    match constraint {
        FlatConstraint::Lin { op, rhs, terms } => propagate_lin(*op, terms, *rhs, store),
        FlatConstraint::Reif { b, op, rhs, terms } => propagate_reif(*b, *op, terms, *rhs, store),
        FlatConstraint::Min { y, xs } => propagate_min(*y, xs, store),
        FlatConstraint::Max { y, xs } => propagate_max(*y, xs, store),
    }
}

/// Runs all propagators to a fixpoint. The result is a subset of the input
/// domains; the pass is monotone and idempotent.
pub fn propagate(csp: &FlatCsp, store: &mut DomainStore) -> Result<(), Inconsistency> {
    loop {
        let mut changed = false;
        for constraint in &csp.constraints {
            changed |= propagate_constraint(constraint, store)?;
        }
        if !changed {
            return Ok(());
        }
    }
}

/// A total assignment, with the objective value (`var / scale`) when the CSP
/// declares an objective.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub values: Vec<i64>,
    pub objective: Option<Rational>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    /// Search-tree nodes visited (one per propagation-and-branch step).
    pub nodes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub solution: Option<Solution>,
    pub stats: SolveStats,
}

struct Search<'a> {
    csp: &'a FlatCsp,
    stats: SolveStats,
    optimize: bool,
    /// Objective-variable value the next incumbent must beat (inclusive).
    bound: Option<i64>,
    incumbent: Option<Vec<i64>>,
}

impl<'a> Search<'a> {
    fn run(&mut self, mut store: DomainStore) -> bool {
        self.stats.nodes += 1;

        if let (true, Some(bound), Some(obj)) = (self.optimize, self.bound, self.csp.objective) {
            let tightened = match obj.sense {
                Sense::Maximize => store.tighten_lo(obj.var, bound),
                Sense::Minimize => store.tighten_hi(obj.var, bound),
            };
            if tightened.is_err() {
                return false;
            }
        }
        if propagate(self.csp, &mut store).is_err() {
            return false;
        }

        let unfixed = (0..self.csp.vars.len())
            .map(VarId)
            .find(|&v| !store.is_fixed(v));
        let Some(branch_var) = unfixed else {
            let values: Vec<i64> = (0..self.csp.vars.len())
                .map(|i| store.lo(VarId(i)))
                .collect();
            debug_assert_eq!(check_solution(self.csp, &values), Ok(true));
            self.incumbent = Some(values);
            if !self.optimize {
                return true;
            }
            let obj = self.csp.objective.expect("optimizing with an objective");
            let v = store.lo(obj.var);
            self.bound = Some(match obj.sense {
                Sense::Maximize => v + 1,
                Sense::Minimize => v - 1,
            });
            return false;
        };

        let lo = store.lo(branch_var);
        let mut left = store.clone();
        if left.fix(branch_var, lo).is_ok() && self.run(left) {
            return true;
        }
        let mut right = store;
        if right.tighten_lo(branch_var, lo + 1).is_ok() && self.run(right) {
            return true;
        }
        false
    }
}

fn solve(csp: &FlatCsp, optimize: bool) -> SolveResult {
    let mut search = Search {
        csp,
        stats: SolveStats::default(),
        optimize,
        bound: None,
        incumbent: None,
    };
    search.run(DomainStore::from_csp(csp));
    let solution = search.incumbent.map(|values| {
        let objective = csp
            .objective
            .map(|obj| Rational::new(values[obj.var.0], obj.scale));
        Solution { values, objective }
    });
    SolveResult {
        solution,
        stats: search.stats,
    }
}

/// First solution in the deterministic search order, or `None` when
/// unsatisfiable.
pub fn solve_sat(csp: &FlatCsp) -> SolveResult {
    solve(csp, false)
}

/// Branch-and-bound optimum: after each incumbent the objective variable is
/// constrained past it and search continues; the last incumbent is optimal.
pub fn solve_opt(csp: &FlatCsp) -> SolveResult {
    assert!(csp.objective.is_some(), "solve_opt requires an objective");
    solve(csp, true)
}

/// Direct evaluation of every constraint under a total assignment,
/// independent of the propagation code paths.
pub fn check_solution(csp: &FlatCsp, values: &[i64]) -> Result<bool, CheckError> {
    if values.len() != csp.vars.len() {
        return Err(CheckError::MissingVar {
            got: values.len(),
            want: csp.vars.len(),
        });
    }
    let in_domain = csp
        .vars
        .iter()
        .zip(values)
        .all(|(&(lo, hi), &v)| lo <= v && v <= hi);
    if !in_domain {
        return Ok(false);
    }
    let eval_sum =
        |terms: &[(i64, VarId)]| -> i64 { terms.iter().map(|&(a, x)| a * values[x.0]).sum() };
    let holds = |op: LinOp, sum: i64, rhs: i64| match op {
        LinOp::Eq => sum == rhs,
        LinOp::Le => sum <= rhs,
    };
    for constraint in &csp.constraints {
        let ok = match constraint {
            FlatConstraint::Lin { op, rhs, terms } => holds(*op, eval_sum(terms), *rhs),
            FlatConstraint::Reif { b, op, rhs, terms } => {
                let bv = values[b.0];
                (bv == 0 || bv == 1) && (bv == 1) == holds(*op, eval_sum(terms), *rhs)
            }
            FlatConstraint::Min { y, xs } => {
                values[y.0] == xs.iter().map(|x| values[x.0]).min().expect("non-empty")
            }
            FlatConstraint::Max { y, xs } => {
                values[y.0] == xs.iter().map(|x| values[x.0]).max().expect("non-empty")
            }
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}
