//! Lowering from the raw AST to a validated [`StochasticModel`]: name
//! resolution, exact probability construction, stage counting, and a final
//! validation pass whose diagnostics are mapped back to source spans.

use std::collections::HashMap;

use crate::diag::{codes, Diagnostic, Pos, Subject};
use crate::model::{
    validate_model, ConstraintDecl, ConstraintKind, DecisionVar, Expr, ObjectiveDecl,
    StochasticModel, StochasticVar,
};
use crate::rational::Rational;

use super::ast::{Ast, AstExpr, AstExprKind, Item, ProbLit};

#[derive(Clone, Copy)]
enum Resolved {
    Decision(usize),
    Stoch(usize),
}

fn prob_to_rational(lit: &ProbLit, out: &mut Vec<Diagnostic>, code: &'static str) -> Rational {
    if lit.den <= 0 {
        out.push(Diagnostic::at(
            code,
            lit.span.start,
            format!(
                "probability denominator must be positive, got {}/{}",
                lit.num, lit.den
            ),
        ));
        return Rational::ZERO;
    }
    Rational::new(lit.num, lit.den)
}

fn resolve_expr(
    expr: &AstExpr,
    names: &HashMap<String, Resolved>,
    out: &mut Vec<Diagnostic>,
) -> Expr {
    match &expr.kind {
        AstExprKind::Int(v) => Expr::Const(*v),
        AstExprKind::Var(name) => match names.get(name) {
            Some(Resolved::Decision(i)) => Expr::Decision(*i),
            Some(Resolved::Stoch(i)) => Expr::Stoch(*i),
            None => {
                out.push(Diagnostic::at(
                    codes::NAME_UNRESOLVED,
                    expr.span.start,
                    format!("reference to undeclared variable `{name}`"),
                ));
                Expr::Const(0)
            }
        },
        AstExprKind::Add(a, b) => {
            Expr::add(resolve_expr(a, names, out), resolve_expr(b, names, out))
        }
        AstExprKind::Sub(a, b) => {
            Expr::sub(resolve_expr(a, names, out), resolve_expr(b, names, out))
        }
        AstExprKind::Mul(k, e) => Expr::mul(*k, resolve_expr(e, names, out)),
        AstExprKind::Cmp(op, a, b) => Expr::cmp(
            *op,
            resolve_expr(a, names, out),
            resolve_expr(b, names, out),
        ),
        AstExprKind::Not(e) => Expr::not(resolve_expr(e, names, out)),
        AstExprKind::And(a, b) => {
            Expr::and(resolve_expr(a, names, out), resolve_expr(b, names, out))
        }
        AstExprKind::Or(a, b) => Expr::or(resolve_expr(a, names, out), resolve_expr(b, names, out)),
    }
}

/// Lowers an AST into a validated model. The stage count is the maximum
/// declared stage. Any diagnostic (duplicate names, unresolved references, or
/// a failed validation invariant) withholds the model.
pub fn lower(ast: &Ast) -> Result<StochasticModel, Vec<Diagnostic>> {
    let mut out: Vec<Diagnostic> = Vec::new();
    let mut names: HashMap<String, Resolved> = HashMap::new();
    let mut name_pos: HashMap<String, Pos> = HashMap::new();

    let mut decisions: Vec<DecisionVar> = Vec::new();
    let mut stochastics: Vec<StochasticVar> = Vec::new();
    let mut constraint_items: Vec<&Item> = Vec::new();
    let mut objective_item: Option<&Item> = None;

    // First pass: declarations, so constraints may reference later variables.
    for item in &ast.items {
        match item {
            Item::Decision {
                name,
                lo,
                hi,
                stage,
                span,
            } => {
                if names.contains_key(name) {
                    out.push(Diagnostic::at(
                        codes::NAME_DUP,
                        span.start,
                        format!("variable `{name}` is already declared"),
                    ));
                    continue;
                }
                names.insert(name.clone(), Resolved::Decision(decisions.len()));
                name_pos.insert(name.clone(), span.start);
                decisions.push(DecisionVar {
                    name: name.clone(),
                    lo: *lo,
                    hi: *hi,
                    stage: (*stage).max(0) as usize,
                });
            }
            Item::Stochastic {
                name,
                outcomes,
                stage,
                span,
            } => {
                if names.contains_key(name) {
                    out.push(Diagnostic::at(
                        codes::NAME_DUP,
                        span.start,
                        format!("variable `{name}` is already declared"),
                    ));
                    continue;
                }
                names.insert(name.clone(), Resolved::Stoch(stochastics.len()));
                name_pos.insert(name.clone(), span.start);
                let dist = outcomes
                    .iter()
                    .map(|(value, prob)| {
                        (*value, prob_to_rational(prob, &mut out, codes::DIST_PROB))
                    })
                    .collect();
                stochastics.push(StochasticVar {
                    name: name.clone(),
                    dist,
                    stage: (*stage).max(0) as usize,
                });
            }
            Item::Constraint { .. } => constraint_items.push(item),
            Item::Objective { span, .. } => {
                if objective_item.is_some() {
                    out.push(Diagnostic::at(
                        codes::OBJ_MULTI,
                        span.start,
                        "model already declares an objective",
                    ));
                } else {
                    objective_item = Some(item);
                }
            }
        }
    }

    let mut constraints: Vec<ConstraintDecl> = Vec::new();
    let mut constraint_pos: Vec<Pos> = Vec::new();
    for item in &constraint_items {
        if let Item::Constraint { chance, body, span } = item {
            let kind = match chance {
                Some(lit) => {
                    ConstraintKind::Chance(prob_to_rational(lit, &mut out, codes::THETA_RANGE))
                }
                None => ConstraintKind::Hard,
            };
            constraints.push(ConstraintDecl {
                body: resolve_expr(body, &names, &mut out),
                kind,
            });
            constraint_pos.push(span.start);
        }
    }

    let mut objective = None;
    let mut objective_pos = None;
    if let Some(Item::Objective {
        sense,
        aggregator,
        body,
        span,
    }) = objective_item
    {
        objective = Some(ObjectiveDecl {
            sense: *sense,
            aggregator: *aggregator,
            body: resolve_expr(body, &names, &mut out),
        });
        objective_pos = Some(span.start);
    }

    let stage_count = decisions
        .iter()
        .map(|d| d.stage)
        .chain(stochastics.iter().map(|s| s.stage))
        .max()
        .unwrap_or(1)
        .max(1);

    let model = StochasticModel {
        stage_count,
        decisions,
        stochastics,
        constraints,
        objective,
    };

    // Structural validation; map each finding back to a source position.
    for diag in validate_model(&model).diagnostics {
        let pos = match &diag.subject {
            Some(Subject::Var(name)) => name_pos.get(name).copied(),
            Some(Subject::Constraint(i)) => constraint_pos.get(*i).copied(),
            Some(Subject::Objective) => objective_pos,
            _ => None,
        };
        out.push(match pos {
            Some(p) => diag.with_pos(p),
            None => diag,
        });
    }

    if out.is_empty() {
        Ok(model)
    } else {
        Err(out)
    }
}
