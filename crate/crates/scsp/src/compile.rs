//! Compilation of a stochastic model into a conventional finite-domain CSP.
//!
//! The compilation follows the scenario semantics: every constraint and the
//! objective body are instantiated once per scenario, with stochastic
//! variables replaced by their scenario values and decision variables mapped
//! to one shared flat copy per (decision, history-prefix) pair. That sharing
//! realizes non-anticipativity structurally: scenarios with the same history
//! through stage `i-1` reference the identical flat variable for every
//! stage-`i` decision.
//!
//! Chance constraints reify the per-scenario bodies into 0/1 variables and
//! clear denominators: with `L = lcm(den θ, den p_s)` the weighted sum
//! `Σ (p_s·L)·b_s ≥ θ·L` is purely integer-linear.
//!
//! Per-scenario work is pure and merged in scenario order, so compilation is
//! deterministic in both execution modes.

use std::collections::HashMap;

use thiserror::Error;

use crate::exec::{map_ordered, ExecMode};
use crate::flat::{FlatConstraint, FlatCsp, LinOp, Objective, VarId};
use crate::model::{Aggregator, CmpOp, ConstraintKind, Expr, Sense, StochasticModel};
use crate::rational::{lcm, Rational};
use crate::scenario::{build_scenario_tree, NodeId, ScenarioTree, TreeError, DEFAULT_SCENARIO_CAP};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CompileError {
    #[error(transparent)]
    Tree(#[from] TreeError),
}

#[derive(Debug, Clone)]
pub struct CompileOptions {
    pub max_scenarios: usize,
    pub mode: ExecMode,
}

impl Default for CompileOptions {
    fn default() -> CompileOptions {
        CompileOptions {
            max_scenarios: DEFAULT_SCENARIO_CAP,
            mode: ExecMode::default(),
        }
    }
}

/// One flat copy of a decision variable for a given history prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecisionCopy {
    /// Index into `model.decisions`.
    pub decision: usize,
    /// Tree node at depth `stage - 1` whose subtree shares this copy.
    pub node: NodeId,
    pub var: VarId,
}

/// Reified truth of one chance constraint in one scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChanceReif {
    /// Index into `model.constraints`.
    pub constraint: usize,
    pub scenario: usize,
    pub b: VarId,
}

/// Mapping metadata produced by compilation: enough to reconstruct a policy
/// from a flat solution.
#[derive(Debug, Clone, Default)]
pub struct VarTable {
    entries: Vec<DecisionCopy>,
    index: HashMap<(usize, NodeId), VarId>,
    reifs: Vec<ChanceReif>,
}

impl VarTable {
    /// Decision copies in (stage, node, declaration) creation order.
    pub fn entries(&self) -> &[DecisionCopy] {
        &self.entries
    }

    pub fn reifs(&self) -> &[ChanceReif] {
        &self.reifs
    }

    /// The flat copy of `decision` shared by all scenarios through `node`.
    pub fn lookup(&self, decision: usize, node: NodeId) -> VarId {
        self.index[&(decision, node)]
    }

    /// The flat variable `decision` maps to in the scenario ending at `leaf`.
    pub fn var_for_scenario(
        &self,
        model: &StochasticModel,
        tree: &ScenarioTree,
        decision: usize,
        leaf: NodeId,
    ) -> VarId {
        let stage = model.decisions[decision].stage;
        let node = tree.ancestor_at_depth(leaf, stage - 1);
        self.lookup(decision, node)
    }
}

#[derive(Debug, Clone)]
pub struct CompileOutput {
    pub csp: FlatCsp,
    pub table: VarTable,
    pub tree: ScenarioTree,
}

/// Creates one flat variable per (decision, depth-(stage-1) node) pair with
/// the decision's domain, in (stage, node, declaration) order.
pub fn instantiate_decisions(
    model: &StochasticModel,
    tree: &ScenarioTree,
    csp: &mut FlatCsp,
) -> VarTable {
    let mut table = VarTable::default();
    for stage in 1..=model.stage_count {
        for node in tree.nodes_at_depth(stage - 1) {
            for (di, d) in model.decisions.iter().enumerate() {
                if d.stage != stage {
                    continue;
                }
                let var = csp.new_var(d.lo, d.hi);
                table.entries.push(DecisionCopy {
                    decision: di,
                    node,
                    var,
                });
                table.index.insert((di, node), var);
            }
        }
    }
    table
}

/// A linear expression `Σ aᵢ·xᵢ + constant` over flat variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct LinForm {
    terms: Vec<(i64, VarId)>,
    constant: i64,
}

impl LinForm {
    fn constant(c: i64) -> LinForm {
        LinForm {
            terms: Vec::new(),
            constant: c,
        }
    }

    fn var(v: VarId) -> LinForm {
        LinForm {
            terms: vec![(1, v)],
            constant: 0,
        }
    }

    fn add_term(&mut self, coeff: i64, var: VarId) {
        if let Some(entry) = self.terms.iter_mut().find(|(_, v)| *v == var) {
            entry.0 += coeff;
        } else {
            self.terms.push((coeff, var));
        }
    }

    fn combine(mut self, scale: i64, other: &LinForm) -> LinForm {
        for &(a, v) in &other.terms {
            self.add_term(scale * a, v);
        }
        self.constant += scale * other.constant;
        self
    }

    /// Drops zero-coefficient terms; first-occurrence order is kept.
    fn normalized(mut self) -> LinForm {
        self.terms.retain(|&(a, _)| a != 0);
        self
    }

    fn negated(&self) -> LinForm {
        LinForm {
            terms: self.terms.iter().map(|&(a, v)| (-a, v)).collect(),
            constant: -self.constant,
        }
    }

    /// Interval bounds of the form given variable domains.
    fn bounds(&self, domains: &[(i64, i64)]) -> (i64, i64) {
        let mut lo = self.constant;
        let mut hi = self.constant;
        for &(a, v) in &self.terms {
            let (vlo, vhi) = domains[v.0];
            if a >= 0 {
                lo += a * vlo;
                hi += a * vhi;
            } else {
                lo += a * vhi;
                hi += a * vlo;
            }
        }
        (lo, hi)
    }
}

/// Everything fixed about one scenario during expression compilation.
struct ScenarioCtx<'a> {
    /// Stochastic values, indexed by stochastic-variable index.
    stoch_values: &'a [i64],
    /// Flat copy of each decision along this scenario's prefix.
    decision_vars: &'a [VarId],
}

fn linear_form(expr: &Expr, ctx: &ScenarioCtx<'_>) -> LinForm {
    match expr {
        Expr::Const(v) => LinForm::constant(*v),
        Expr::Decision(i) => LinForm::var(ctx.decision_vars[*i]),
        Expr::Stoch(i) => LinForm::constant(ctx.stoch_values[*i]),
        Expr::Add(a, b) => linear_form(a, ctx).combine(1, &linear_form(b, ctx)),
        Expr::Sub(a, b) => linear_form(a, ctx).combine(-1, &linear_form(b, ctx)),
        Expr::Mul(k, e) => {
            let inner = linear_form(e, ctx);
            LinForm::constant(0).combine(*k, &inner)
        }
        _ => unreachable!("linear_form called on a boolean expression"),
    }
}

/// Local/global variable reference inside a not-yet-merged fragment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ref {
    Global(VarId),
    Local(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum FragConstraint {
    Lin {
        op: LinOp,
        rhs: i64,
        terms: Vec<(i64, Ref)>,
    },
    Reif {
        b: Ref,
        op: LinOp,
        rhs: i64,
        terms: Vec<(i64, Ref)>,
    },
}

/// The per-scenario compilation product: fresh 0/1 variables and constraints
/// whose local references are renumbered when fragments are merged in
/// scenario order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Fragment {
    vars: Vec<(i64, i64)>,
    cons: Vec<FragConstraint>,
}

impl Fragment {
    fn new_bool(&mut self) -> Ref {
        let id = self.vars.len();
        self.vars.push((0, 1));
        Ref::Local(id)
    }

    fn push_lin(&mut self, op: LinOp, rhs: i64, terms: Vec<(i64, Ref)>) {
        self.cons.push(FragConstraint::Lin { op, rhs, terms });
    }
}

fn global_terms(form: &LinForm) -> Vec<(i64, Ref)> {
    form.terms
        .iter()
        .map(|&(a, v)| (a, Ref::Global(v)))
        .collect()
}

/// Canonical linear atom for a comparison: `Σ a·x (=|≤) rhs`.
fn canon_cmp(op: CmpOp, lhs: &Expr, rhs: &Expr, ctx: &ScenarioCtx<'_>) -> (LinOp, i64, LinForm) {
    let diff = linear_form(lhs, ctx)
        .combine(-1, &linear_form(rhs, ctx))
        .normalized();
    let c = diff.constant;
    match op {
        CmpOp::Eq => (LinOp::Eq, -c, diff),
        CmpOp::Le => (LinOp::Le, -c, diff),
        CmpOp::Lt => (LinOp::Le, -c - 1, diff),
        CmpOp::Ge => (LinOp::Le, c, diff.negated()),
        CmpOp::Gt => (LinOp::Le, c - 1, diff.negated()),
        CmpOp::Ne => unreachable!("!= is rewritten as a disjunction before canon_cmp"),
    }
}

/// Compiles `expr` to a fresh 0/1 variable that is 1 exactly when the
/// expression holds in this scenario.
fn reify(expr: &Expr, ctx: &ScenarioCtx<'_>, frag: &mut Fragment) -> Ref {
    match expr {
        // x != y  ⇒  (x < y) \/ (x > y), over integers.
        Expr::Cmp(CmpOp::Ne, a, b) => {
            let rewrite = Expr::or(
                Expr::Cmp(CmpOp::Lt, a.clone(), b.clone()),
                Expr::Cmp(CmpOp::Gt, a.clone(), b.clone()),
            );
            reify(&rewrite, ctx, frag)
        }
        Expr::Cmp(op, a, b) => {
            let (lin_op, rhs, form) = canon_cmp(*op, a, b, ctx);
            let b_var = frag.new_bool();
            frag.cons.push(FragConstraint::Reif {
                b: b_var,
                op: lin_op,
                rhs,
                terms: global_terms(&form),
            });
            b_var
        }
        Expr::And(a, b) => {
            let ba = reify(a, ctx, frag);
            let bb = reify(b, ctx, frag);
            let c = frag.new_bool();
            // c ≤ ba, c ≤ bb, c ≥ ba + bb − 1
            frag.push_lin(LinOp::Le, 0, vec![(1, c), (-1, ba)]);
            frag.push_lin(LinOp::Le, 0, vec![(1, c), (-1, bb)]);
            frag.push_lin(LinOp::Le, 1, vec![(1, ba), (1, bb), (-1, c)]);
            c
        }
        Expr::Or(a, b) => {
            let ba = reify(a, ctx, frag);
            let bb = reify(b, ctx, frag);
            let c = frag.new_bool();
            // c ≥ ba, c ≥ bb, c ≤ ba + bb
            frag.push_lin(LinOp::Le, 0, vec![(1, ba), (-1, c)]);
            frag.push_lin(LinOp::Le, 0, vec![(1, bb), (-1, c)]);
            frag.push_lin(LinOp::Le, 0, vec![(1, c), (-1, ba), (-1, bb)]);
            c
        }
        Expr::Not(a) => {
            let ba = reify(a, ctx, frag);
            let c = frag.new_bool();
            // c + ba = 1
            frag.cons.push(FragConstraint::Lin {
                op: LinOp::Eq,
                rhs: 1,
                terms: vec![(1, c), (1, ba)],
            });
            c
        }
        // a -> b  ⇒  !a \/ b
        Expr::Implies(a, b) => {
            let rewrite = Expr::or(Expr::not((**a).clone()), (**b).clone());
            reify(&rewrite, ctx, frag)
        }
        _ => unreachable!("reify called on an arithmetic expression"),
    }
}

/// Compiles `expr` as a must-hold constraint for this scenario. Bare
/// comparisons and conjunctions become plain linear atoms; anything else is
/// reified and its top boolean fixed to 1.
fn compile_root(expr: &Expr, ctx: &ScenarioCtx<'_>, frag: &mut Fragment) {
    match expr {
        Expr::And(a, b) => {
            compile_root(a, ctx, frag);
            compile_root(b, ctx, frag);
        }
        Expr::Cmp(op, a, b) if *op != CmpOp::Ne => {
            let (lin_op, rhs, form) = canon_cmp(*op, a, b, ctx);
            frag.cons.push(FragConstraint::Lin {
                op: lin_op,
                rhs,
                terms: global_terms(&form),
            });
        }
        _ => {
            let top = reify(expr, ctx, frag);
            frag.cons.push(FragConstraint::Lin {
                op: LinOp::Eq,
                rhs: 1,
                terms: vec![(1, top)],
            });
        }
    }
}

/// Appends the fragment's fresh variables and constraints to the CSP,
/// resolving local references. Returns the resolver for the fragment's refs.
fn merge_fragment(csp: &mut FlatCsp, frag: &Fragment) -> impl Fn(Ref) -> VarId {
    let base = csp.vars.len();
    for &(lo, hi) in &frag.vars {
        csp.new_var(lo, hi);
    }
    let resolve = move |r: Ref| match r {
        Ref::Global(v) => v,
        Ref::Local(i) => VarId(base + i),
    };
    for con in &frag.cons {
        let mapped = match con {
            FragConstraint::Lin { op, rhs, terms } => FlatConstraint::Lin {
                op: *op,
                rhs: *rhs,
                terms: terms.iter().map(|&(a, r)| (a, resolve(r))).collect(),
            },
            FragConstraint::Reif { b, op, rhs, terms } => FlatConstraint::Reif {
                b: resolve(*b),
                op: *op,
                rhs: *rhs,
                terms: terms.iter().map(|&(a, r)| (a, resolve(r))).collect(),
            },
        };
        csp.push(mapped);
    }
    resolve
}

/// Dense per-scenario contexts: stochastic values and decision copies.
struct ScenarioData {
    stoch_values: Vec<i64>,
    decision_vars: Vec<VarId>,
}

fn scenario_data(
    model: &StochasticModel,
    tree: &ScenarioTree,
    table: &VarTable,
) -> Vec<ScenarioData> {
    tree.scenarios()
        .map(|s| {
            let mut stoch_values = vec![0i64; model.stochastics.len()];
            for &(si, value) in s.assignment {
                stoch_values[si] = value;
            }
            let decision_vars = (0..model.decisions.len())
                .map(|di| table.var_for_scenario(model, tree, di, s.leaf))
                .collect();
            ScenarioData {
                stoch_values,
                decision_vars,
            }
        })
        .collect()
}

/// `lcm` of the threshold's denominator (when given) and every scenario
/// probability's denominator.
fn clearing_scale(theta: Option<Rational>, probs: &[Rational]) -> i64 {
    let mut scale = theta.map_or(1, |t| t.denom());
    for p in probs {
        scale = lcm(scale, p.denom());
    }
    scale
}

/// Full compilation: scenario tree, decision instantiation, constraint and
/// objective expansion. Output is deterministic for identical input in both
/// execution modes.
pub fn compile_with(
    model: &StochasticModel,
    options: &CompileOptions,
) -> Result<CompileOutput, CompileError> {
    let tree = build_scenario_tree(model, options.max_scenarios)?;
    let mut csp = FlatCsp::new();
    let mut table = instantiate_decisions(model, &tree, &mut csp);

    let data = scenario_data(model, &tree, &table);
    let probs: Vec<Rational> = tree.scenarios().map(|s| s.prob).collect();

    for (ci, constraint) in model.constraints.iter().enumerate() {
        match &constraint.kind {
            ConstraintKind::Hard => {
                let frags = map_ordered(&data, options.mode, |d| {
                    let ctx = ScenarioCtx {
                        stoch_values: &d.stoch_values,
                        decision_vars: &d.decision_vars,
                    };
                    let mut frag = Fragment::default();
                    compile_root(&constraint.body, &ctx, &mut frag);
                    frag
                });
                for frag in &frags {
                    let _ = merge_fragment(&mut csp, frag);
                }
            }
            ConstraintKind::Chance(theta) => {
                let frags = map_ordered(&data, options.mode, |d| {
                    let ctx = ScenarioCtx {
                        stoch_values: &d.stoch_values,
                        decision_vars: &d.decision_vars,
                    };
                    let mut frag = Fragment::default();
                    let top = reify(&constraint.body, &ctx, &mut frag);
                    (frag, top)
                });
                let mut bools = Vec::with_capacity(frags.len());
                for (scenario, (frag, top)) in frags.iter().enumerate() {
                    let resolve = merge_fragment(&mut csp, frag);
                    let b = resolve(*top);
                    table.reifs.push(ChanceReif {
                        constraint: ci,
                        scenario,
                        b,
                    });
                    bools.push(b);
                }
                // Σ (p_s·L)·b_s ≥ θ·L, emitted as ≤ with negated coefficients.
                let scale = clearing_scale(Some(*theta), &probs);
                let terms: Vec<(i64, VarId)> = bools
                    .iter()
                    .zip(&probs)
                    .map(|(&b, p)| (-(p.numer() * (scale / p.denom())), b))
                    .collect();
                let rhs = -(theta.numer() * (scale / theta.denom()));
                csp.push(FlatConstraint::Lin {
                    op: LinOp::Le,
                    rhs,
                    terms,
                });
            }
        }
    }

    if let Some(obj) = &model.objective {
        let forms = map_ordered(&data, options.mode, |d| {
            let ctx = ScenarioCtx {
                stoch_values: &d.stoch_values,
                decision_vars: &d.decision_vars,
            };
            linear_form(&obj.body, &ctx).normalized()
        });

        // One auxiliary e_s per scenario holding the body value.
        let mut values = Vec::with_capacity(forms.len());
        for form in &forms {
            let (lo, hi) = form.bounds(&csp.vars);
            let e = csp.new_var(lo, hi);
            let mut terms = vec![(1, e)];
            terms.extend(form.terms.iter().map(|&(a, v)| (-a, v)));
            csp.push(FlatConstraint::Lin {
                op: LinOp::Eq,
                rhs: form.constant,
                terms,
            });
            values.push(e);
        }

        let bounds = |vars: &[VarId], csp: &FlatCsp| -> (Vec<i64>, Vec<i64>) {
            let lo = vars.iter().map(|v| csp.vars[v.0].0).collect();
            let hi = vars.iter().map(|v| csp.vars[v.0].1).collect();
            (lo, hi)
        };

        let (objective_var, scale) = match obj.aggregator {
            Aggregator::Expected => {
                let scale = clearing_scale(None, &probs);
                let weights: Vec<i64> = probs
                    .iter()
                    .map(|p| p.numer() * (scale / p.denom()))
                    .collect();
                let (los, his) = bounds(&values, &csp);
                let lo: i64 = weights.iter().zip(&los).map(|(w, l)| w * l).sum();
                let hi: i64 = weights.iter().zip(&his).map(|(w, h)| w * h).sum();
                let o = csp.new_var(lo, hi);
                let mut terms = vec![(1, o)];
                terms.extend(weights.iter().zip(&values).map(|(&w, &e)| (-w, e)));
                csp.push(FlatConstraint::Lin {
                    op: LinOp::Eq,
                    rhs: 0,
                    terms,
                });
                (o, scale)
            }
            Aggregator::Worst | Aggregator::Best => {
                // Worst is pessimistic and Best optimistic relative to the
                // sense: maximize-worst is maximin, minimize-worst minimax.
                let take_min = match (obj.aggregator, obj.sense) {
                    (Aggregator::Worst, Sense::Maximize) => true,
                    (Aggregator::Worst, Sense::Minimize) => false,
                    (Aggregator::Best, Sense::Maximize) => false,
                    (Aggregator::Best, Sense::Minimize) => true,
                    _ => unreachable!(),
                };
                let (los, his) = bounds(&values, &csp);
                let o = if take_min {
                    let o = csp.new_var(
                        los.iter().copied().min().unwrap(),
                        his.iter().copied().min().unwrap(),
                    );
                    csp.push(FlatConstraint::Min {
                        y: o,
                        xs: values.clone(),
                    });
                    o
                } else {
                    let o = csp.new_var(
                        los.iter().copied().max().unwrap(),
                        his.iter().copied().max().unwrap(),
                    );
                    csp.push(FlatConstraint::Max {
                        y: o,
                        xs: values.clone(),
                    });
                    o
                };
                (o, 1)
            }
            Aggregator::Spread => {
                let (los, his) = bounds(&values, &csp);
                let mx = csp.new_var(
                    los.iter().copied().max().unwrap(),
                    his.iter().copied().max().unwrap(),
                );
                csp.push(FlatConstraint::Max {
                    y: mx,
                    xs: values.clone(),
                });
                let mn = csp.new_var(
                    los.iter().copied().min().unwrap(),
                    his.iter().copied().min().unwrap(),
                );
                csp.push(FlatConstraint::Min {
                    y: mn,
                    xs: values.clone(),
                });
                let (mx_lo, mx_hi) = csp.vars[mx.0];
                let (mn_lo, mn_hi) = csp.vars[mn.0];
                let o = csp.new_var(mx_lo - mn_hi, mx_hi - mn_lo);
                csp.push(FlatConstraint::Lin {
                    op: LinOp::Eq,
                    rhs: 0,
                    terms: vec![(1, o), (-1, mx), (1, mn)],
                });
                (o, 1)
            }
        };
        csp.objective = Some(Objective {
            sense: obj.sense,
            var: objective_var,
            scale,
        });
    }

    debug_assert!(csp.well_formed());
    Ok(CompileOutput { csp, table, tree })
}

/// Compiles with default options (scenario cap 100000, default mode).
pub fn compile(model: &StochasticModel) -> Result<CompileOutput, CompileError> {
    compile_with(model, &CompileOptions::default())
}

/// Mapping metadata rendered as dump comments: one line per scenario with its
/// probability and joint outcome, one line per decision copy.
pub fn dump_metadata(
    model: &StochasticModel,
    tree: &ScenarioTree,
    table: &VarTable,
) -> Vec<String> {
    let mut out = Vec::new();
    for s in tree.scenarios() {
        let mut line = format!(
            "scenario {} prob {}/{}",
            s.index,
            s.prob.numer(),
            s.prob.denom()
        );
        for &(si, value) in s.assignment {
            line.push_str(&format!(" {}={}", model.stochastics[si].name, value));
        }
        out.push(line);
    }
    for entry in table.entries() {
        out.push(format!(
            "decision {} node {} var {}",
            model.decisions[entry.decision].name,
            tree.node_path(entry.node),
            entry.var.0
        ));
    }
    out
}
