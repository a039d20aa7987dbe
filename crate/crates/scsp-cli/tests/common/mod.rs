//! Shared fixtures and random-instance generators for the CLI and acceptance
//! suites. The generators are test-side only and deliberately independent of
//! the library's own compilation path.

// Each test binary uses a different slice of this module.
#![allow(dead_code)]

use rand::Rng;

use scsp::flat::{FlatConstraint, FlatCsp, LinOp, Objective, VarId};
use scsp::model::{
    Aggregator, CmpOp, ConstraintDecl, ConstraintKind, DecisionVar, Expr, ObjectiveDecl, Sense,
    StochasticModel, StochasticVar,
};
use scsp::oracle::PolicySlots;
use scsp::rational::Rational;
use scsp::scenario::build_scenario_tree;

/// Worked fixture: two policies, optimum expected value 3/2 at x = 1.
pub const M1: &str = "int x in 0..1 stage 1;\n\
stoch w in {0:1/2, 1:1/2} stage 1;\n\
chance(1/2) x = w;\n\
maximize expected x + w;\n";

/// M1 with θ = 3/4: every policy meets the chance body with probability
/// exactly 1/2, so the model is infeasible.
pub const M1_TIGHT: &str = "int x in 0..1 stage 1;\n\
stoch w in {0:1/2, 1:1/2} stage 1;\n\
chance(3/4) x = w;\n\
maximize expected x + w;\n";

/// Worked fixture: 27 policies, optimum expected value 5/3.
pub const M2: &str = "int x1 in 0..2 stage 1;\n\
stoch w1 in {1:1/3, 2:2/3} stage 1;\n\
int x2 in 0..2 stage 2;\n\
x1 + x2 >= w1;\n\
minimize expected x1 + x2;\n";

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub max_decisions: usize,
    pub max_stochastics: usize,
    pub max_outcomes: usize,
    pub max_domain_size: i64,
    pub max_constraints: usize,
    /// Guarantee at least one chance constraint.
    pub require_chance: bool,
    /// Guarantee at least one hard constraint.
    pub require_hard: bool,
    /// Pin the objective to maximize-expected (for monotonicity checks).
    pub force_expected_max: bool,
    /// Resample until the policy space is at most this large.
    pub policy_budget: u128,
}

impl Default for GenConfig {
    fn default() -> GenConfig {
        GenConfig {
            max_decisions: 3,
            max_stochastics: 2,
            max_outcomes: 3,
            max_domain_size: 4,
            max_constraints: 3,
            require_chance: true,
            require_hard: false,
            force_expected_max: false,
            policy_budget: 20_000,
        }
    }
}

fn rand_arith(rng: &mut impl Rng, depth: usize, n_dec: usize, n_stoch: usize) -> Expr {
    if depth == 0 || rng.random_bool(0.4) {
        match rng.random_range(0..3) {
            0 => Expr::Const(rng.random_range(-3..=3)),
            1 => Expr::Decision(rng.random_range(0..n_dec)),
            _ => Expr::Stoch(rng.random_range(0..n_stoch)),
        }
    } else {
        let a = rand_arith(rng, depth - 1, n_dec, n_stoch);
        let b = rand_arith(rng, depth - 1, n_dec, n_stoch);
        match rng.random_range(0..3) {
            0 => Expr::add(a, b),
            1 => Expr::sub(a, b),
            _ => {
                let k = *[-2, -1, 2, 3].get(rng.random_range(0..4)).unwrap();
                Expr::mul(k, a)
            }
        }
    }
}

fn rand_cmp(rng: &mut impl Rng, n_dec: usize, n_stoch: usize) -> Expr {
    let ops = [
        CmpOp::Eq,
        CmpOp::Ne,
        CmpOp::Le,
        CmpOp::Lt,
        CmpOp::Ge,
        CmpOp::Gt,
    ];
    Expr::cmp(
        ops[rng.random_range(0..ops.len())],
        rand_arith(rng, 1, n_dec, n_stoch),
        rand_arith(rng, 1, n_dec, n_stoch),
    )
}

fn rand_bool(rng: &mut impl Rng, depth: usize, n_dec: usize, n_stoch: usize) -> Expr {
    if depth == 0 {
        return rand_cmp(rng, n_dec, n_stoch);
    }
    match rng.random_range(0..6) {
        0 => Expr::and(
            rand_bool(rng, depth - 1, n_dec, n_stoch),
            rand_bool(rng, depth - 1, n_dec, n_stoch),
        ),
        1 => Expr::or(
            rand_bool(rng, depth - 1, n_dec, n_stoch),
            rand_bool(rng, depth - 1, n_dec, n_stoch),
        ),
        2 => Expr::not(rand_bool(rng, depth - 1, n_dec, n_stoch)),
        _ => rand_cmp(rng, n_dec, n_stoch),
    }
}

fn rand_theta(rng: &mut impl Rng) -> Rational {
    let den = rng.random_range(2..=6);
    let num = rng.random_range(1..=den);
    Rational::new(num, den)
}

fn build_candidate(rng: &mut impl Rng, cfg: &GenConfig) -> StochasticModel {
    let n_dec = rng.random_range(1..=cfg.max_decisions);
    let n_stoch = rng.random_range(1..=cfg.max_stochastics);

    let decisions: Vec<DecisionVar> = (0..n_dec)
        .map(|i| {
            let lo = rng.random_range(0..=2);
            let size = rng.random_range(1..=cfg.max_domain_size);
            DecisionVar {
                name: format!("x{i}"),
                lo,
                hi: lo + size - 1,
                stage: if i == 0 { 1 } else { rng.random_range(1..=2) },
            }
        })
        .collect();

    let stochastics: Vec<StochasticVar> = (0..n_stoch)
        .map(|i| {
            let k = rng.random_range(2..=cfg.max_outcomes);
            let mut values: Vec<i64> = Vec::new();
            while values.len() < k {
                let v = rng.random_range(0..=4);
                if !values.contains(&v) {
                    values.push(v);
                }
            }
            let weights: Vec<i64> = (0..k).map(|_| rng.random_range(1..=5)).collect();
            let total: i64 = weights.iter().sum();
            StochasticVar {
                name: format!("w{i}"),
                dist: values
                    .into_iter()
                    .zip(weights)
                    .map(|(v, w)| (v, Rational::new(w, total)))
                    .collect(),
                stage: rng.random_range(1..=2),
            }
        })
        .collect();

    let stage_count = decisions
        .iter()
        .map(|d| d.stage)
        .chain(stochastics.iter().map(|s| s.stage))
        .max()
        .unwrap();

    let n_cons = rng.random_range(1..=cfg.max_constraints);
    let constraints: Vec<ConstraintDecl> = (0..n_cons)
        .map(|i| {
            let chance = if cfg.require_chance && i == 0 {
                true
            } else if cfg.require_hard && i == n_cons - 1 {
                false
            } else {
                rng.random_bool(0.5)
            };
            ConstraintDecl {
                body: rand_bool(rng, 2, n_dec, n_stoch),
                kind: if chance {
                    ConstraintKind::Chance(rand_theta(rng))
                } else {
                    ConstraintKind::Hard
                },
            }
        })
        .collect();

    let aggregators = [
        Aggregator::Expected,
        Aggregator::Worst,
        Aggregator::Best,
        Aggregator::Spread,
    ];
    let objective = Some(if cfg.force_expected_max {
        ObjectiveDecl {
            sense: Sense::Maximize,
            aggregator: Aggregator::Expected,
            body: rand_arith(rng, 2, n_dec, n_stoch),
        }
    } else {
        ObjectiveDecl {
            sense: if rng.random_bool(0.5) {
                Sense::Maximize
            } else {
                Sense::Minimize
            },
            aggregator: aggregators[rng.random_range(0..aggregators.len())],
            body: rand_arith(rng, 2, n_dec, n_stoch),
        }
    });

    StochasticModel {
        stage_count,
        decisions,
        stochastics,
        constraints,
        objective,
    }
}

/// Draws a random model whose policy space fits the configured budget.
pub fn random_model(rng: &mut impl Rng, cfg: &GenConfig) -> StochasticModel {
    loop {
        let model = build_candidate(rng, cfg);
        let tree = build_scenario_tree(&model, 100_000).expect("within scenario bounds");
        if PolicySlots::new(&model, &tree).policy_count() <= cfg.policy_budget {
            return model;
        }
    }
}

/// A random flat CSP with at most `max_vars` variables and a bounded
/// assignment space, mixing all four constraint kinds.
pub fn random_flat_csp(rng: &mut impl Rng, max_vars: usize, space_budget: u128) -> FlatCsp {
    loop {
        let n = rng.random_range(1..=max_vars);
        let mut csp = FlatCsp::new();
        let mut space = 1u128;
        for i in 0..n {
            // Keep a few guaranteed 0/1 variables around for reification.
            let (lo, hi) = if i < n.div_ceil(4) {
                (0, 1)
            } else {
                let lo = rng.random_range(-2..=2);
                (lo, lo + rng.random_range(0..4))
            };
            space = space.saturating_mul((hi - lo + 1) as u128);
            csp.new_var(lo, hi);
        }
        if space > space_budget {
            continue;
        }

        let var = |rng: &mut dyn rand::RngCore| VarId(rng.random_range(0..n));
        let bool_var = |rng: &mut dyn rand::RngCore| VarId(rng.random_range(0..n.div_ceil(4)));
        let n_cons = rng.random_range(1..=8);
        for _ in 0..n_cons {
            let kind = rng.random_range(0..8);
            let constraint = match kind {
                0..=3 => {
                    let k = rng.random_range(1..=3.min(n));
                    let terms: Vec<(i64, VarId)> = (0..k)
                        .map(|_| {
                            let c = *[-3, -2, -1, 1, 2, 3].get(rng.random_range(0..6)).unwrap();
                            (c, var(rng))
                        })
                        .collect();
                    let op = if rng.random_bool(0.3) {
                        LinOp::Eq
                    } else {
                        LinOp::Le
                    };
                    FlatConstraint::Lin {
                        op,
                        rhs: rng.random_range(-8..=8),
                        terms,
                    }
                }
                4 | 5 => {
                    let k = rng.random_range(1..=3.min(n));
                    let terms: Vec<(i64, VarId)> = (0..k)
                        .map(|_| {
                            let c = *[-3, -2, -1, 1, 2, 3].get(rng.random_range(0..6)).unwrap();
                            (c, var(rng))
                        })
                        .collect();
                    let op = if rng.random_bool(0.4) {
                        LinOp::Eq
                    } else {
                        LinOp::Le
                    };
                    FlatConstraint::Reif {
                        b: bool_var(rng),
                        op,
                        rhs: rng.random_range(-6..=6),
                        terms,
                    }
                }
                6 => {
                    let k = rng.random_range(1..=3.min(n));
                    FlatConstraint::Min {
                        y: var(rng),
                        xs: (0..k).map(|_| var(rng)).collect(),
                    }
                }
                _ => {
                    let k = rng.random_range(1..=3.min(n));
                    FlatConstraint::Max {
                        y: var(rng),
                        xs: (0..k).map(|_| var(rng)).collect(),
                    }
                }
            };
            csp.push(constraint);
        }
        if rng.random_bool(0.6) {
            csp.objective = Some(Objective {
                sense: if rng.random_bool(0.5) {
                    Sense::Maximize
                } else {
                    Sense::Minimize
                },
                var: var(rng),
                scale: rng.random_range(1..=3),
            });
        }
        return csp;
    }
}

/// Test-local constraint evaluation, written independently of the library's
/// solver and checker so enumeration is a genuine oracle.
pub fn eval_flat(csp: &FlatCsp, values: &[i64]) -> bool {
    for (i, &(lo, hi)) in csp.vars.iter().enumerate() {
        if values[i] < lo || values[i] > hi {
            return false;
        }
    }
    csp.constraints.iter().all(|c| match c {
        FlatConstraint::Lin { op, rhs, terms } => {
            let sum: i64 = terms.iter().map(|&(a, x)| a * values[x.0]).sum();
            match op {
                LinOp::Eq => sum == *rhs,
                LinOp::Le => sum <= *rhs,
            }
        }
        FlatConstraint::Reif { b, op, rhs, terms } => {
            let sum: i64 = terms.iter().map(|&(a, x)| a * values[x.0]).sum();
            let truth = match op {
                LinOp::Eq => sum == *rhs,
                LinOp::Le => sum <= *rhs,
            };
            values[b.0] == i64::from(truth)
        }
        FlatConstraint::Min { y, xs } => {
            values[y.0] == xs.iter().map(|x| values[x.0]).min().unwrap()
        }
        FlatConstraint::Max { y, xs } => {
            values[y.0] == xs.iter().map(|x| values[x.0]).max().unwrap()
        }
    })
}

/// All satisfying assignments, in lexicographic order.
pub fn all_flat_solutions(csp: &FlatCsp) -> Vec<Vec<i64>> {
    let n = csp.vars.len();
    let mut values: Vec<i64> = csp.vars.iter().map(|&(lo, _)| lo).collect();
    let mut out = Vec::new();
    loop {
        if eval_flat(csp, &values) {
            out.push(values.clone());
        }
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if values[i] < csp.vars[i].1 {
                values[i] += 1;
                for (v, &(lo, _)) in values[i + 1..].iter_mut().zip(&csp.vars[i + 1..]) {
                    *v = lo;
                }
                break;
            }
        }
    }
}

/// Exhaustively enumerates all assignments in lexicographic order (first
/// variable slowest). Returns the first satisfying assignment and the
/// optimal objective-variable value when an objective is declared.
pub fn enumerate_flat(csp: &FlatCsp) -> (Option<Vec<i64>>, Option<i64>) {
    let n = csp.vars.len();
    let mut values: Vec<i64> = csp.vars.iter().map(|&(lo, _)| lo).collect();
    let mut first: Option<Vec<i64>> = None;
    let mut best: Option<i64> = None;
    loop {
        if eval_flat(csp, &values) {
            if first.is_none() {
                first = Some(values.clone());
            }
            if let Some(obj) = csp.objective {
                let v = values[obj.var.0];
                best = Some(match (best, obj.sense) {
                    (None, _) => v,
                    (Some(b), Sense::Maximize) => b.max(v),
                    (Some(b), Sense::Minimize) => b.min(v),
                });
            }
        }
        // Odometer step: last variable fastest.
        let mut i = n;
        loop {
            if i == 0 {
                return (first, best);
            }
            i -= 1;
            if values[i] < csp.vars[i].1 {
                values[i] += 1;
                for (v, &(lo, _)) in values[i + 1..].iter_mut().zip(&csp.vars[i + 1..]) {
                    *v = lo;
                }
                break;
            }
        }
    }
}
