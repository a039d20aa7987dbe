//! In-memory representation of a stochastic constraint program.
//!
//! A model interleaves staged decision variables (set by the solver) with
//! staged stochastic variables (drawn from declared finite distributions),
//! plus hard and chance constraints and at most one objective. All values are
//! immutable after construction; [`validate_model`] checks every structural
//! invariant and reports violations as coded diagnostics.

use crate::diag::{codes, Diagnostic, Subject};
use crate::rational::Rational;

/// An integer decision variable with an inclusive domain, set at `stage`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionVar {
    pub name: String,
    pub lo: i64,
    pub hi: i64,
    pub stage: usize,
}

/// A stochastic variable observed at `stage`, with a finite distribution of
/// pairwise-distinct integer outcomes whose probabilities sum to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StochasticVar {
    pub name: String,
    pub dist: Vec<(i64, Rational)>,
    pub stage: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Le,
    Lt,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Le => "<=",
            CmpOp::Lt => "<",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }
}

/// Expression tree over model variables. Arithmetic is restricted to linear
/// forms: the only product is a constant multiple. Comparisons turn arithmetic
/// into booleans; logical nodes combine booleans.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Const(i64),
    /// Reference to `decisions[i]`.
    Decision(usize),
    /// Reference to `stochastics[i]`.
    Stoch(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    /// Constant multiple `k * e`.
    Mul(i64, Box<Expr>),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    /// `a -> b`, equivalent to `!a \/ b`.
    Implies(Box<Expr>, Box<Expr>),
}

// Constructor shorthands; these build trees, they are not operator impls.
#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn cmp(op: CmpOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Cmp(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn add(lhs: Expr, rhs: Expr) -> Expr {
        Expr::Add(Box::new(lhs), Box::new(rhs))
    }

    pub fn sub(lhs: Expr, rhs: Expr) -> Expr {
        Expr::Sub(Box::new(lhs), Box::new(rhs))
    }

    pub fn mul(k: i64, e: Expr) -> Expr {
        Expr::Mul(k, Box::new(e))
    }

    pub fn and(lhs: Expr, rhs: Expr) -> Expr {
        Expr::And(Box::new(lhs), Box::new(rhs))
    }

    pub fn or(lhs: Expr, rhs: Expr) -> Expr {
        Expr::Or(Box::new(lhs), Box::new(rhs))
    }

    pub fn not(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstraintKind {
    /// Must hold in every scenario.
    Hard,
    /// Must hold with probability at least `theta` over scenarios.
    Chance(Rational),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintDecl {
    pub body: Expr,
    pub kind: ConstraintKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

/// How the per-scenario objective values are aggregated into one number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregator {
    /// Probability-weighted average.
    Expected,
    /// Pessimistic scenario value relative to the sense.
    Worst,
    /// Optimistic scenario value relative to the sense.
    Best,
    /// Max minus min across scenarios.
    Spread,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectiveDecl {
    pub sense: Sense,
    pub aggregator: Aggregator,
    pub body: Expr,
}

/// An m-stage stochastic constraint program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StochasticModel {
    pub stage_count: usize,
    pub decisions: Vec<DecisionVar>,
    pub stochastics: Vec<StochasticVar>,
    pub constraints: Vec<ConstraintDecl>,
    pub objective: Option<ObjectiveDecl>,
}

/// Result of [`validate_model`]: empty diagnostics means the model is valid.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub diagnostics: Vec<Diagnostic>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.diagnostics.is_empty()
    }
}

/// Whether an expression evaluates to an integer or a truth value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ExprKind {
    Arith,
    Bool,
}

fn expr_kind(expr: &Expr, out: &mut Vec<Diagnostic>, ctx: &str, subject: &Subject) -> ExprKind {
    match expr {
        Expr::Const(_) | Expr::Decision(_) | Expr::Stoch(_) => ExprKind::Arith,
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            for side in [a, b] {
                if expr_kind(side, out, ctx, subject) != ExprKind::Arith {
                    out.push(
                        Diagnostic::new(
                            codes::EXPR_TYPE,
                            format!("{ctx}: arithmetic operator applied to a boolean operand"),
                        )
                        .about(subject.clone()),
                    );
                }
            }
            ExprKind::Arith
        }
        Expr::Mul(_, e) => {
            if expr_kind(e, out, ctx, subject) != ExprKind::Arith {
                out.push(
                    Diagnostic::new(
                        codes::EXPR_TYPE,
                        format!("{ctx}: constant multiple applied to a boolean operand"),
                    )
                    .about(subject.clone()),
                );
            }
            ExprKind::Arith
        }
        Expr::Cmp(_, a, b) => {
            for side in [a, b] {
                if expr_kind(side, out, ctx, subject) != ExprKind::Arith {
                    out.push(
                        Diagnostic::new(
                            codes::EXPR_TYPE,
                            format!("{ctx}: comparison applied to a boolean operand"),
                        )
                        .about(subject.clone()),
                    );
                }
            }
            ExprKind::Bool
        }
        Expr::Not(e) => {
            if expr_kind(e, out, ctx, subject) != ExprKind::Bool {
                out.push(
                    Diagnostic::new(
                        codes::EXPR_TYPE,
                        format!("{ctx}: logical operator applied to an arithmetic operand"),
                    )
                    .about(subject.clone()),
                );
            }
            ExprKind::Bool
        }
        Expr::And(a, b) | Expr::Or(a, b) | Expr::Implies(a, b) => {
            for side in [a, b] {
                if expr_kind(side, out, ctx, subject) != ExprKind::Bool {
                    out.push(
                        Diagnostic::new(
                            codes::EXPR_TYPE,
                            format!("{ctx}: logical operator applied to an arithmetic operand"),
                        )
                        .about(subject.clone()),
                    );
                }
            }
            ExprKind::Bool
        }
    }
}

fn check_refs(
    expr: &Expr,
    model: &StochasticModel,
    out: &mut Vec<Diagnostic>,
    ctx: &str,
    subject: &Subject,
) {
    match expr {
        Expr::Const(_) => {}
        Expr::Decision(i) => {
            if *i >= model.decisions.len() {
                out.push(
                    Diagnostic::new(
                        codes::NAME_UNRESOLVED,
                        format!("{ctx}: decision variable index {i} out of range"),
                    )
                    .about(subject.clone()),
                );
            }
        }
        Expr::Stoch(i) => {
            if *i >= model.stochastics.len() {
                out.push(
                    Diagnostic::new(
                        codes::NAME_UNRESOLVED,
                        format!("{ctx}: stochastic variable index {i} out of range"),
                    )
                    .about(subject.clone()),
                );
            }
        }
        Expr::Mul(_, e) | Expr::Not(e) => check_refs(e, model, out, ctx, subject),
        Expr::Add(a, b)
        | Expr::Sub(a, b)
        | Expr::Cmp(_, a, b)
        | Expr::And(a, b)
        | Expr::Or(a, b)
        | Expr::Implies(a, b) => {
            check_refs(a, model, out, ctx, subject);
            check_refs(b, model, out, ctx, subject);
        }
    }
}

/// Checks every structural invariant of the model and returns one diagnostic
/// per violation. Never fails: problems are the return value.
pub fn validate_model(model: &StochasticModel) -> ValidationReport {
    let mut out = Vec::new();
    let m = model.stage_count;

    if m < 1 {
        out.push(
            Diagnostic::new(codes::STAGE_RANGE, "model must have at least one stage")
                .about(Subject::Model),
        );
    }

    // Name uniqueness across decisions and stochastics.
    let mut seen: Vec<&str> = Vec::new();
    for name in model
        .decisions
        .iter()
        .map(|d| d.name.as_str())
        .chain(model.stochastics.iter().map(|s| s.name.as_str()))
    {
        if seen.contains(&name) {
            out.push(
                Diagnostic::new(codes::NAME_DUP, format!("duplicate variable name `{name}`"))
                    .about(Subject::Var(name.to_string())),
            );
        } else {
            seen.push(name);
        }
    }

    for d in &model.decisions {
        if d.lo > d.hi {
            out.push(
                Diagnostic::new(
                    codes::DOM_EMPTY,
                    format!("decision `{}` has empty domain {}..{}", d.name, d.lo, d.hi),
                )
                .about(Subject::Var(d.name.clone())),
            );
        }
        if d.stage < 1 || d.stage > m {
            out.push(
                Diagnostic::new(
                    codes::STAGE_RANGE,
                    format!(
                        "decision `{}` declared at stage {} outside 1..{m}",
                        d.name, d.stage
                    ),
                )
                .about(Subject::Var(d.name.clone())),
            );
        }
    }

    for s in &model.stochastics {
        if s.stage < 1 || s.stage > m {
            out.push(
                Diagnostic::new(
                    codes::STAGE_RANGE,
                    format!(
                        "stochastic `{}` declared at stage {} outside 1..{m}",
                        s.name, s.stage
                    ),
                )
                .about(Subject::Var(s.name.clone())),
            );
        }
        let mut values: Vec<i64> = Vec::new();
        for &(value, prob) in &s.dist {
            if values.contains(&value) {
                out.push(
                    Diagnostic::new(
                        codes::DIST_DUP,
                        format!("stochastic `{}` lists outcome {value} twice", s.name),
                    )
                    .about(Subject::Var(s.name.clone())),
                );
            } else {
                values.push(value);
            }
            if prob <= Rational::ZERO {
                out.push(
                    Diagnostic::new(
                        codes::DIST_PROB,
                        format!(
                            "stochastic `{}` has non-positive probability {prob} for outcome {value}",
                            s.name
                        ),
                    )
                    .about(Subject::Var(s.name.clone())),
                );
            }
        }
        let total = s.dist.iter().fold(Rational::ZERO, |acc, &(_, p)| acc + p);
        if total != Rational::ONE {
            out.push(
                Diagnostic::new(
                    codes::DIST_SUM,
                    format!(
                        "stochastic `{}` probabilities sum to {total}, not 1",
                        s.name
                    ),
                )
                .about(Subject::Var(s.name.clone())),
            );
        }
    }

    // Every stage must hold at least one variable.
    for stage in 1..=m {
        let used = model.decisions.iter().any(|d| d.stage == stage)
            || model.stochastics.iter().any(|s| s.stage == stage);
        if !used {
            out.push(
                Diagnostic::new(
                    codes::STAGE_EMPTY,
                    format!("stage {stage} declares no decision or stochastic variable"),
                )
                .about(Subject::Model),
            );
        }
    }

    for (i, c) in model.constraints.iter().enumerate() {
        let ctx = format!("constraint #{}", i + 1);
        let subject = Subject::Constraint(i);
        check_refs(&c.body, model, &mut out, &ctx, &subject);
        if expr_kind(&c.body, &mut out, &ctx, &subject) != ExprKind::Bool {
            out.push(
                Diagnostic::new(
                    codes::EXPR_TYPE,
                    format!("{ctx}: body must be a comparison or logical expression"),
                )
                .about(subject.clone()),
            );
        }
        if let ConstraintKind::Chance(theta) = &c.kind {
            if *theta <= Rational::ZERO || *theta > Rational::ONE {
                out.push(
                    Diagnostic::new(
                        codes::THETA_RANGE,
                        format!("{ctx}: chance threshold {theta} outside (0, 1]"),
                    )
                    .about(subject.clone()),
                );
            }
        }
    }

    if let Some(obj) = &model.objective {
        let ctx = "objective";
        let subject = Subject::Objective;
        check_refs(&obj.body, model, &mut out, ctx, &subject);
        if expr_kind(&obj.body, &mut out, ctx, &subject) != ExprKind::Arith {
            out.push(
                Diagnostic::new(
                    codes::EXPR_TYPE,
                    "objective: body must be an arithmetic expression",
                )
                .about(Subject::Objective),
            );
        }
    }

    ValidationReport { diagnostics: out }
}
