//! Brute-force policy oracle: enumerates every policy tree of a small model,
//! evaluates constraints and objectives by direct interpretation of the
//! expression tree, and returns the exact optimum.
//!
//! This is the ground truth the scenario compilation is checked against. It
//! shares nothing with the compiler's code path: constraint bodies are
//! interpreted, probabilities are summed as exact rationals, and the optimum
//! is found by exhaustive search.
//!
//! Enumeration is lexicographic over (decision, history-prefix) slots in
//! (stage, node, declaration) order. Chunks of the policy stream may be
//! evaluated in parallel; candidates are ordered by (objective value, index),
//! a total order, so the parallel reduction returns exactly the sequential
//! winner.

use thiserror::Error;

use crate::exec::ExecMode;
use crate::model::{
    Aggregator, CmpOp, ConstraintKind, Expr, ObjectiveDecl, Sense, StochasticModel,
};
use crate::rational::{rat_fold, Rational};
use crate::scenario::{build_scenario_tree, NodeId, ScenarioTree, TreeError, DEFAULT_SCENARIO_CAP};

/// Default cap on the number of policies the oracle will enumerate.
pub const DEFAULT_POLICY_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("SIZE_LIMIT: {policies} policies to enumerate, cap is {cap}")]
    SizeLimit { policies: u128, cap: u128 },
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// One assignable (decision, history-prefix) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolicySlot {
    /// Index into `model.decisions`.
    pub decision: usize,
    /// Tree node at depth `stage - 1`.
    pub node: NodeId,
    pub lo: i64,
    pub hi: i64,
}

/// The slot list of a model/tree pair, in (stage, node, declaration) order —
/// the same order the compiler creates flat decision copies in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicySlots {
    slots: Vec<PolicySlot>,
}

impl PolicySlots {
    pub fn new(model: &StochasticModel, tree: &ScenarioTree) -> PolicySlots {
        let mut slots = Vec::new();
        for stage in 1..=model.stage_count {
            for node in tree.nodes_at_depth(stage - 1) {
                for (di, d) in model.decisions.iter().enumerate() {
                    if d.stage == stage {
                        slots.push(PolicySlot {
                            decision: di,
                            node,
                            lo: d.lo,
                            hi: d.hi,
                        });
                    }
                }
            }
        }
        PolicySlots { slots }
    }

    pub fn slots(&self) -> &[PolicySlot] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Exact number of policies: the product of slot domain sizes
    /// (saturating, which only matters past any practical cap).
    pub fn policy_count(&self) -> u128 {
        self.slots.iter().fold(1u128, |acc, s| {
            acc.saturating_mul((s.hi - s.lo + 1) as u128)
        })
    }

    /// The `index`-th policy in lexicographic order (first slot varies
    /// slowest, values ascending).
    pub fn decode(&self, index: u128) -> Policy {
        let mut values = vec![0i64; self.slots.len()];
        let mut k = index;
        for i in (0..self.slots.len()).rev() {
            let size = (self.slots[i].hi - self.slots[i].lo + 1) as u128;
            values[i] = self.slots[i].lo + (k % size) as i64;
            k /= size;
        }
        debug_assert_eq!(k, 0, "index within policy count");
        Policy { values }
    }

    /// Slot index of `decision` in the scenario ending at `leaf`.
    fn slot_for(
        &self,
        model: &StochasticModel,
        tree: &ScenarioTree,
        decision: usize,
        leaf: NodeId,
    ) -> usize {
        let stage = model.decisions[decision].stage;
        let node = tree.ancestor_at_depth(leaf, stage - 1);
        self.slots
            .iter()
            .position(|s| s.decision == decision && s.node == node)
            .expect("slot exists for every (decision, prefix) pair")
    }
}

/// A full policy: one value per slot, within the slot's domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy {
    pub values: Vec<i64>,
}

/// Per-constraint and objective statistics of one policy, all exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyEvaluation {
    pub constraints: Vec<ConstraintOutcome>,
    pub objective: Option<ObjectiveStats>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintOutcome {
    Hard { holds_in_all: bool },
    Chance { probability: Rational },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObjectiveStats {
    pub expected: Rational,
    pub min: i64,
    pub max: i64,
    pub spread: i64,
}

fn eval_arith(expr: &Expr, dv: &impl Fn(usize) -> i64, sv: &[i64]) -> i64 {
    match expr {
        Expr::Const(v) => *v,
        Expr::Decision(i) => dv(*i),
        Expr::Stoch(i) => sv[*i],
        Expr::Add(a, b) => eval_arith(a, dv, sv) + eval_arith(b, dv, sv),
        Expr::Sub(a, b) => eval_arith(a, dv, sv) - eval_arith(b, dv, sv),
        Expr::Mul(k, e) => k * eval_arith(e, dv, sv),
        _ => unreachable!("boolean expression in arithmetic position"),
    }
}

fn eval_bool(expr: &Expr, dv: &impl Fn(usize) -> i64, sv: &[i64]) -> bool {
    match expr {
        Expr::Cmp(op, a, b) => {
            let lhs = eval_arith(a, dv, sv);
            let rhs = eval_arith(b, dv, sv);
            match op {
                CmpOp::Eq => lhs == rhs,
                CmpOp::Ne => lhs != rhs,
                CmpOp::Le => lhs <= rhs,
                CmpOp::Lt => lhs < rhs,
                CmpOp::Ge => lhs >= rhs,
                CmpOp::Gt => lhs > rhs,
            }
        }
        Expr::Not(e) => !eval_bool(e, dv, sv),
        Expr::And(a, b) => eval_bool(a, dv, sv) && eval_bool(b, dv, sv),
        Expr::Or(a, b) => eval_bool(a, dv, sv) || eval_bool(b, dv, sv),
        Expr::Implies(a, b) => !eval_bool(a, dv, sv) || eval_bool(b, dv, sv),
        _ => unreachable!("arithmetic expression in boolean position"),
    }
}

/// Per-scenario lookup tables shared by every policy evaluation.
struct EvalContext {
    /// `[scenario][stochastic index]` value.
    stoch_values: Vec<Vec<i64>>,
    /// `[scenario][decision index]` slot index.
    slot_of: Vec<Vec<usize>>,
    probs: Vec<Rational>,
}

impl EvalContext {
    fn new(model: &StochasticModel, tree: &ScenarioTree, slots: &PolicySlots) -> EvalContext {
        let mut stoch_values = Vec::with_capacity(tree.scenario_count());
        let mut slot_of = Vec::with_capacity(tree.scenario_count());
        let mut probs = Vec::with_capacity(tree.scenario_count());
        for s in tree.scenarios() {
            let mut sv = vec![0i64; model.stochastics.len()];
            for &(si, value) in s.assignment {
                sv[si] = value;
            }
            stoch_values.push(sv);
            slot_of.push(
                (0..model.decisions.len())
                    .map(|di| slots.slot_for(model, tree, di, s.leaf))
                    .collect(),
            );
            probs.push(s.prob);
        }
        EvalContext {
            stoch_values,
            slot_of,
            probs,
        }
    }

    fn scenario_count(&self) -> usize {
        self.probs.len()
    }
}

/// Scenario-wise evaluation of a policy: each constraint body is interpreted
/// directly; chance probabilities are exact sums of scenario probabilities;
/// objective statistics are probability-weighted (expected) or unweighted
/// extremes (min/max/spread) over scenarios.
pub fn evaluate_policy(
    model: &StochasticModel,
    tree: &ScenarioTree,
    slots: &PolicySlots,
    policy: &Policy,
) -> PolicyEvaluation {
    assert_eq!(
        policy.values.len(),
        slots.len(),
        "policy must be total over slots"
    );
    let ctx = EvalContext::new(model, tree, slots);
    evaluate_in_context(model, &ctx, policy)
}

fn evaluate_in_context(
    model: &StochasticModel,
    ctx: &EvalContext,
    policy: &Policy,
) -> PolicyEvaluation {
    let n = ctx.scenario_count();
    let mut constraints = Vec::with_capacity(model.constraints.len());
    for c in &model.constraints {
        match &c.kind {
            ConstraintKind::Hard => {
                let holds = (0..n).all(|s| {
                    let dv = |di: usize| policy.values[ctx.slot_of[s][di]];
                    eval_bool(&c.body, &dv, &ctx.stoch_values[s])
                });
                constraints.push(ConstraintOutcome::Hard {
                    holds_in_all: holds,
                });
            }
            ConstraintKind::Chance(_) => {
                let probability = (0..n)
                    .filter(|&s| {
                        let dv = |di: usize| policy.values[ctx.slot_of[s][di]];
                        eval_bool(&c.body, &dv, &ctx.stoch_values[s])
                    })
                    .fold(Rational::ZERO, |acc, s| acc + ctx.probs[s]);
                constraints.push(ConstraintOutcome::Chance { probability });
            }
        }
    }
    let objective = model.objective.as_ref().map(|obj| {
        let values: Vec<i64> = (0..n)
            .map(|s| {
                let dv = |di: usize| policy.values[ctx.slot_of[s][di]];
                eval_arith(&obj.body, &dv, &ctx.stoch_values[s])
            })
            .collect();
        let terms: Vec<(Rational, i64)> = ctx
            .probs
            .iter()
            .copied()
            .zip(values.iter().copied())
            .collect();
        let min = *values.iter().min().expect("at least one scenario");
        let max = *values.iter().max().expect("at least one scenario");
        ObjectiveStats {
            expected: rat_fold(&terms),
            min,
            max,
            spread: max - min,
        }
    });
    PolicyEvaluation {
        constraints,
        objective,
    }
}

/// Feasibility under the model's constraint kinds: hard constraints hold in
/// every scenario, each chance probability meets its threshold.
pub fn is_feasible(model: &StochasticModel, eval: &PolicyEvaluation) -> bool {
    model
        .constraints
        .iter()
        .zip(&eval.constraints)
        .all(|(c, outcome)| match (&c.kind, outcome) {
            (ConstraintKind::Hard, ConstraintOutcome::Hard { holds_in_all }) => *holds_in_all,
            (ConstraintKind::Chance(theta), ConstraintOutcome::Chance { probability }) => {
                probability >= theta
            }
            _ => unreachable!("outcome kind matches constraint kind"),
        })
}

/// The scalar a policy's objective stats aggregate to, given the declaration.
pub fn objective_value(obj: &ObjectiveDecl, stats: &ObjectiveStats) -> Rational {
    match (obj.aggregator, obj.sense) {
        (Aggregator::Expected, _) => stats.expected,
        (Aggregator::Worst, Sense::Maximize) => Rational::from_int(stats.min),
        (Aggregator::Worst, Sense::Minimize) => Rational::from_int(stats.max),
        (Aggregator::Best, Sense::Maximize) => Rational::from_int(stats.max),
        (Aggregator::Best, Sense::Minimize) => Rational::from_int(stats.min),
        (Aggregator::Spread, _) => Rational::from_int(stats.spread),
    }
}

/// Lexicographic stream of all policies. Fails with `SIZE_LIMIT` when the
/// count exceeds `cap`.
pub fn enumerate_policies<'a>(
    model: &StochasticModel,
    tree: &'a ScenarioTree,
    cap: u128,
) -> Result<impl Iterator<Item = Policy> + 'a, OracleError> {
    let slots = PolicySlots::new(model, tree);
    let count = slots.policy_count();
    if count > cap {
        return Err(OracleError::SizeLimit {
            policies: count,
            cap,
        });
    }
    Ok((0..count).map(move |i| slots.decode(i)))
}

#[derive(Debug, Clone)]
pub struct OracleOptions {
    pub max_policies: u128,
    pub max_scenarios: usize,
    pub mode: ExecMode,
}

impl Default for OracleOptions {
    fn default() -> OracleOptions {
        OracleOptions {
            max_policies: DEFAULT_POLICY_CAP,
            max_scenarios: DEFAULT_SCENARIO_CAP,
            mode: ExecMode::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleOutcome {
    Feasible {
        policy: Policy,
        /// Optimal objective value; `None` when the model has no objective.
        objective: Option<Rational>,
    },
    Infeasible,
}

/// A feasible policy with its index and objective value; the reduction key is
/// (sense-adjusted value, index), a total order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Candidate {
    index: u128,
    value: Option<Rational>,
}

fn better(a: Candidate, b: Candidate, sense: Option<Sense>) -> Candidate {
    let a_wins = match (a.value, b.value, sense) {
        (Some(av), Some(bv), Some(Sense::Maximize)) => av > bv || (av == bv && a.index < b.index),
        (Some(av), Some(bv), Some(Sense::Minimize)) => av < bv || (av == bv && a.index < b.index),
        _ => a.index < b.index,
    };
    if a_wins {
        a
    } else {
        b
    }
}

/// Exhaustive ground-truth solve: enumerates every policy, keeps the feasible
/// one optimizing the objective (ties broken by enumeration order; without an
/// objective, the first feasible policy wins).
pub fn oracle_solve(
    model: &StochasticModel,
    options: &OracleOptions,
) -> Result<OracleOutcome, OracleError> {
    let tree = build_scenario_tree(model, options.max_scenarios)?;
    let slots = PolicySlots::new(model, &tree);
    let count = slots.policy_count();
    if count > options.max_policies {
        return Err(OracleError::SizeLimit {
            policies: count,
            cap: options.max_policies,
        });
    }
    let ctx = EvalContext::new(model, &tree, &slots);
    let sense = model.objective.as_ref().map(|o| o.sense);

    let candidate = |index: u128| -> Option<Candidate> {
        let policy = slots.decode(index);
        let eval = evaluate_in_context(model, &ctx, &policy);
        if !is_feasible(model, &eval) {
            return None;
        }
        let value = model
            .objective
            .as_ref()
            .map(|obj| objective_value(obj, eval.objective.as_ref().expect("stats present")));
        Some(Candidate { index, value })
    };

    let combine = |a: Option<Candidate>, b: Option<Candidate>| match (a, b) {
        (Some(a), Some(b)) => Some(better(a, b, sense)),
        (a, None) => a,
        (None, b) => b,
    };

    let best: Option<Candidate> = {
        #[cfg(feature = "parallel")]
        {
            // Any enumerable count fits usize; the cap guarantees it here.
            if options.mode == ExecMode::Parallel && count <= usize::MAX as u128 {
                use rayon::prelude::*;
                (0..count as usize)
                    .into_par_iter()
                    .with_min_len(512)
                    .map(|i| candidate(i as u128))
                    .reduce(|| None, combine)
            } else {
                (0..count).map(candidate).fold(None, combine)
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..count).map(candidate).fold(None, combine)
        }
    };

    Ok(match best {
        Some(c) => OracleOutcome::Feasible {
            policy: slots.decode(c.index),
            objective: c.value,
        },
        None => OracleOutcome::Infeasible,
    })
}
