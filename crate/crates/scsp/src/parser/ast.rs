//! Raw syntax tree produced by the parser: identifiers are unresolved and
//! every node carries its source span.

use crate::diag::Span;
use crate::model::{Aggregator, CmpOp, Sense};

/// A probability literal as written: `num/den` from `a/b`, or the exact
/// rational of a decimal (digits over a power of ten).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProbLit {
    pub num: i64,
    pub den: i64,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AstExpr {
    pub kind: AstExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AstExprKind {
    Int(i64),
    Var(String),
    Add(Box<AstExpr>, Box<AstExpr>),
    Sub(Box<AstExpr>, Box<AstExpr>),
    Mul(i64, Box<AstExpr>),
    Cmp(CmpOp, Box<AstExpr>, Box<AstExpr>),
    Not(Box<AstExpr>),
    And(Box<AstExpr>, Box<AstExpr>),
    Or(Box<AstExpr>, Box<AstExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Item {
    Decision {
        name: String,
        lo: i64,
        hi: i64,
        stage: i64,
        span: Span,
    },
    Stochastic {
        name: String,
        outcomes: Vec<(i64, ProbLit)>,
        stage: i64,
        span: Span,
    },
    Constraint {
        chance: Option<ProbLit>,
        body: AstExpr,
        span: Span,
    },
    Objective {
        sense: Sense,
        aggregator: Aggregator,
        body: AstExpr,
        span: Span,
    },
}

impl Item {
    pub fn span(&self) -> Span {
        match self {
            Item::Decision { span, .. }
            | Item::Stochastic { span, .. }
            | Item::Constraint { span, .. }
            | Item::Objective { span, .. } => *span,
        }
    }
}

/// A parsed model file: the item list in source order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Ast {
    pub items: Vec<Item>,
}
