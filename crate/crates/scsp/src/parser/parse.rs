//! Recursive-descent parser with statement-level error recovery: on a parse
//! error the parser reports what it expected, skips to the next `;`, and
//! keeps going so one run surfaces every malformed item.

use crate::diag::{codes, Diagnostic, Pos, Span};
use crate::model::{Aggregator, CmpOp, Sense};

use super::ast::{Ast, AstExpr, AstExprKind, Item, ProbLit};
use super::token::{Token, TokenKind};

struct Recover;

type PResult<T> = Result<T, Recover>;

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    diags: Vec<Diagnostic>,
}

fn token_end(tok: &Token) -> Pos {
    Pos::new(tok.line, tok.col + tok.text.chars().count() as u32)
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &'a Token {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn peek2(&self) -> &'a Token {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)]
    }

    fn bump(&mut self) -> &'a Token {
        let tok = &self.toks[self.pos.min(self.toks.len() - 1)];
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        tok
    }

    fn at_eof(&self) -> bool {
        self.peek().kind == TokenKind::Eof
    }

    fn error_expected(&mut self, expected: &str) -> Recover {
        let found = self.peek();
        if found.kind == TokenKind::Eof {
            self.diags.push(Diagnostic::at(
                codes::PARSE_EOF,
                found.pos(),
                format!("expected {expected}, found end of input"),
            ));
        } else {
            self.diags.push(Diagnostic::at(
                codes::PARSE_EXPECTED,
                found.pos(),
                format!("expected {expected}, found {}", found.describe()),
            ));
        }
        Recover
    }

    fn expect_sym(&mut self, sym: &str) -> PResult<&'a Token> {
        if self.peek().is_sym(sym) {
            Ok(self.bump())
        } else {
            Err(self.error_expected(&format!("`{sym}`")))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<&'a Token> {
        if self.peek().is_kw(kw) {
            Ok(self.bump())
        } else {
            Err(self.error_expected(&format!("`{kw}`")))
        }
    }

    fn expect_ident(&mut self) -> PResult<&'a Token> {
        if self.peek().kind == TokenKind::Ident {
            Ok(self.bump())
        } else {
            Err(self.error_expected("an identifier"))
        }
    }

    fn expect_int(&mut self) -> PResult<(i64, &'a Token)> {
        if self.peek().kind == TokenKind::Int {
            let tok = self.bump();
            match tok.text.parse::<i64>() {
                Ok(v) => Ok((v, tok)),
                Err(_) => {
                    self.diags.push(Diagnostic::at(
                        codes::PARSE_EXPECTED,
                        tok.pos(),
                        format!("integer literal `{}` out of range", tok.text),
                    ));
                    Err(Recover)
                }
            }
        } else {
            Err(self.error_expected("an integer"))
        }
    }

    /// Skips past the next `;` (or to EOF), the statement-level resync point.
    fn recover_to_semi(&mut self) {
        while !self.at_eof() {
            let tok = self.bump();
            if tok.is_sym(";") {
                return;
            }
        }
    }

    /// prob = int "/" int | decimal, where a decimal is int "." digits with
    /// the fraction converted exactly to digits/10^k.
    fn parse_prob(&mut self) -> PResult<ProbLit> {
        let (first, first_tok) = self.expect_int()?;
        if self.peek().is_sym("/") {
            self.bump();
            let (den, den_tok) = self.expect_int()?;
            Ok(ProbLit {
                num: first,
                den,
                span: Span::new(first_tok.pos(), token_end(den_tok)),
            })
        } else if self.peek().is_sym(".") {
            self.bump();
            if self.peek().kind != TokenKind::Int {
                return Err(self.error_expected("decimal digits"));
            }
            let frac_tok = self.bump();
            let digits = &frac_tok.text;
            if digits.len() > 18 {
                self.diags.push(Diagnostic::at(
                    codes::PARSE_EXPECTED,
                    frac_tok.pos(),
                    "decimal literal has too many digits".to_string(),
                ));
                return Err(Recover);
            }
            let k = digits.len() as u32;
            let den = 10_i64.pow(k);
            let frac: i64 = digits.parse().expect("digit run fits i64");
            let num = first
                .checked_mul(den)
                .and_then(|v| v.checked_add(frac))
                .ok_or_else(|| {
                    self.diags.push(Diagnostic::at(
                        codes::PARSE_EXPECTED,
                        first_tok.pos(),
                        "decimal literal out of range".to_string(),
                    ));
                    Recover
                })?;
            Ok(ProbLit {
                num,
                den,
                span: Span::new(first_tok.pos(), token_end(frac_tok)),
            })
        } else {
            Err(self.error_expected("`/` or `.` in a probability"))
        }
    }

    // expr = orExpr
    fn parse_expr(&mut self) -> PResult<AstExpr> {
        self.parse_or()
    }

    fn parse_or(&mut self) -> PResult<AstExpr> {
        let mut lhs = self.parse_and()?;
        while self.peek().is_sym("\\/") {
            self.bump();
            let rhs = self.parse_and()?;
            let span = lhs.span.merge(rhs.span);
            lhs = AstExpr {
                kind: AstExprKind::Or(Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
        Ok(lhs)
    }

    fn parse_and(&mut self) -> PResult<AstExpr> {
        let mut lhs = self.parse_not()?;
        while self.peek().is_sym("/\\") {
            self.bump();
            let rhs = self.parse_not()?;
            let span = lhs.span.merge(rhs.span);
            lhs = AstExpr {
                kind: AstExprKind::And(Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
        Ok(lhs)
    }

    fn parse_not(&mut self) -> PResult<AstExpr> {
        if self.peek().is_sym("!") {
            let bang = self.bump();
            let inner = self.parse_cmp()?;
            let span = Span::new(bang.pos(), inner.span.end);
            Ok(AstExpr {
                kind: AstExprKind::Not(Box::new(inner)),
                span,
            })
        } else {
            self.parse_cmp()
        }
    }

    fn parse_cmp(&mut self) -> PResult<AstExpr> {
        let lhs = self.parse_sum()?;
        let op = match self.peek().text.as_str() {
            "=" if self.peek().kind == TokenKind::Symbol => CmpOp::Eq,
            "!=" if self.peek().kind == TokenKind::Symbol => CmpOp::Ne,
            "<=" if self.peek().kind == TokenKind::Symbol => CmpOp::Le,
            "<" if self.peek().kind == TokenKind::Symbol => CmpOp::Lt,
            ">=" if self.peek().kind == TokenKind::Symbol => CmpOp::Ge,
            ">" if self.peek().kind == TokenKind::Symbol => CmpOp::Gt,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.parse_sum()?;
        let span = lhs.span.merge(rhs.span);
        Ok(AstExpr {
            kind: AstExprKind::Cmp(op, Box::new(lhs), Box::new(rhs)),
            span,
        })
    }

    fn parse_sum(&mut self) -> PResult<AstExpr> {
        let mut lhs = self.parse_term()?;
        loop {
            let minus = if self.peek().is_sym("+") {
                false
            } else if self.peek().is_sym("-") {
                true
            } else {
                break;
            };
            self.bump();
            let rhs = self.parse_term()?;
            let span = lhs.span.merge(rhs.span);
            let kind = if minus {
                AstExprKind::Sub(Box::new(lhs), Box::new(rhs))
            } else {
                AstExprKind::Add(Box::new(lhs), Box::new(rhs))
            };
            lhs = AstExpr { kind, span };
        }
        Ok(lhs)
    }

    /// A leading `-` is only permitted directly before an integer literal.
    fn parse_signed_int(&mut self) -> PResult<(i64, Span)> {
        if self.peek().is_sym("-") {
            let minus = self.bump();
            let (v, tok) = self.expect_int()?;
            Ok((-v, Span::new(minus.pos(), token_end(tok))))
        } else {
            let (v, tok) = self.expect_int()?;
            Ok((v, Span::new(tok.pos(), token_end(tok))))
        }
    }

    fn starts_int(&self) -> bool {
        self.peek().kind == TokenKind::Int
            || (self.peek().is_sym("-") && self.peek2().kind == TokenKind::Int)
    }

    // term = [ int "*" ] atom | atom
    fn parse_term(&mut self) -> PResult<AstExpr> {
        if self.starts_int() {
            let (value, span) = self.parse_signed_int()?;
            if self.peek().is_sym("*") {
                self.bump();
                let atom = self.parse_atom()?;
                let span = span.merge(atom.span);
                return Ok(AstExpr {
                    kind: AstExprKind::Mul(value, Box::new(atom)),
                    span,
                });
            }
            return Ok(AstExpr {
                kind: AstExprKind::Int(value),
                span,
            });
        }
        self.parse_atom()
    }

    // atom = int | ident | "(" expr ")"
    fn parse_atom(&mut self) -> PResult<AstExpr> {
        if self.starts_int() {
            let (value, span) = self.parse_signed_int()?;
            return Ok(AstExpr {
                kind: AstExprKind::Int(value),
                span,
            });
        }
        if self.peek().kind == TokenKind::Ident {
            let tok = self.bump();
            return Ok(AstExpr {
                kind: AstExprKind::Var(tok.text.clone()),
                span: Span::new(tok.pos(), token_end(tok)),
            });
        }
        if self.peek().is_sym("(") {
            let open = self.bump();
            let inner = self.parse_expr()?;
            let close = self.expect_sym(")")?;
            return Ok(AstExpr {
                kind: inner.kind,
                span: Span::new(open.pos(), token_end(close)),
            });
        }
        Err(self.error_expected("an integer, identifier, or `(`"))
    }

    // decisionDecl = "int" ident "in" int ".." int "stage" int ";"
    fn parse_decision(&mut self) -> PResult<Item> {
        let start = self.expect_kw("int")?.pos();
        let name = self.expect_ident()?.text.clone();
        self.expect_kw("in")?;
        let (lo, _) = self.expect_int()?;
        self.expect_sym("..")?;
        let (hi, _) = self.expect_int()?;
        self.expect_kw("stage")?;
        let (stage, _) = self.expect_int()?;
        let end = token_end(self.expect_sym(";")?);
        Ok(Item::Decision {
            name,
            lo,
            hi,
            stage,
            span: Span::new(start, end),
        })
    }

    // stochDecl = "stoch" ident "in" "{" outcome { "," outcome } "}" "stage" int ";"
    fn parse_stochastic(&mut self) -> PResult<Item> {
        let start = self.expect_kw("stoch")?.pos();
        let name = self.expect_ident()?.text.clone();
        self.expect_kw("in")?;
        self.expect_sym("{")?;
        let mut outcomes = Vec::new();
        loop {
            let (value, _) = self.expect_int()?;
            self.expect_sym(":")?;
            let prob = self.parse_prob()?;
            outcomes.push((value, prob));
            if self.peek().is_sym(",") {
                self.bump();
            } else {
                break;
            }
        }
        self.expect_sym("}")?;
        self.expect_kw("stage")?;
        let (stage, _) = self.expect_int()?;
        let end = token_end(self.expect_sym(";")?);
        Ok(Item::Stochastic {
            name,
            outcomes,
            stage,
            span: Span::new(start, end),
        })
    }

    // constraintDecl = [ "chance" "(" prob ")" ] expr ";"
    fn parse_constraint(&mut self) -> PResult<Item> {
        let start = self.peek().pos();
        let chance = if self.peek().is_kw("chance") {
            self.bump();
            self.expect_sym("(")?;
            let prob = self.parse_prob()?;
            self.expect_sym(")")?;
            Some(prob)
        } else {
            None
        };
        let body = self.parse_expr()?;
        let end = token_end(self.expect_sym(";")?);
        Ok(Item::Constraint {
            chance,
            body,
            span: Span::new(start, end),
        })
    }

    // objectiveDecl = ("maximize"|"minimize") ("expected"|"worst"|"best"|"spread") expr ";"
    fn parse_objective(&mut self) -> PResult<Item> {
        let sense_tok = self.bump();
        let start = sense_tok.pos();
        let sense = if sense_tok.is_kw("maximize") {
            Sense::Maximize
        } else {
            Sense::Minimize
        };
        let aggregator = if self.peek().is_kw("expected") {
            Aggregator::Expected
        } else if self.peek().is_kw("worst") {
            Aggregator::Worst
        } else if self.peek().is_kw("best") {
            Aggregator::Best
        } else if self.peek().is_kw("spread") {
            Aggregator::Spread
        } else {
            return Err(self.error_expected("`expected`, `worst`, `best`, or `spread`"));
        };
        self.bump();
        let body = self.parse_expr()?;
        let end = token_end(self.expect_sym(";")?);
        Ok(Item::Objective {
            sense,
            aggregator,
            body,
            span: Span::new(start, end),
        })
    }

    fn parse_item(&mut self) -> PResult<Item> {
        let tok = self.peek();
        if tok.is_kw("int") {
            self.parse_decision()
        } else if tok.is_kw("stoch") {
            self.parse_stochastic()
        } else if tok.is_kw("maximize") || tok.is_kw("minimize") {
            self.parse_objective()
        } else if tok.is_kw("chance")
            || tok.kind == TokenKind::Int
            || tok.kind == TokenKind::Ident
            || tok.is_sym("(")
            || tok.is_sym("!")
            || tok.is_sym("-")
        {
            self.parse_constraint()
        } else {
            Err(self.error_expected("a declaration, constraint, or objective"))
        }
    }
}

/// Parses a full token stream into an [`Ast`]. All diagnostics gathered
/// during recovery are returned together; a non-empty diagnostic list means
/// the AST is withheld.
pub fn parse(tokens: &[Token]) -> Result<Ast, Vec<Diagnostic>> {
    assert!(
        tokens.last().map(|t| t.kind) == Some(TokenKind::Eof),
        "token stream must end with EOF"
    );
    let mut parser = Parser {
        toks: tokens,
        pos: 0,
        diags: Vec::new(),
    };
    let mut items = Vec::new();
    while !parser.at_eof() {
        match parser.parse_item() {
            Ok(item) => items.push(item),
            Err(Recover) => parser.recover_to_semi(),
        }
    }
    if parser.diags.is_empty() {
        Ok(Ast { items })
    } else {
        Err(parser.diags)
    }
}

#[cfg(test)]
mod tests {
    use super::super::token::tokenize;
    use super::*;

    fn parse_src(src: &str) -> Result<Ast, Vec<Diagnostic>> {
        parse(&tokenize(src).unwrap())
    }

    #[test]
    fn objective_declaration() {
        let ast = parse_src("maximize expected x + w;").unwrap();
        assert_eq!(ast.items.len(), 1);
        match &ast.items[0] {
            Item::Objective {
                sense,
                aggregator,
                body,
                ..
            } => {
                assert_eq!(*sense, Sense::Maximize);
                assert_eq!(*aggregator, Aggregator::Expected);
                match &body.kind {
                    AstExprKind::Add(l, r) => {
                        assert_eq!(l.kind, AstExprKind::Var("x".into()));
                        assert_eq!(r.kind, AstExprKind::Var("w".into()));
                    }
                    other => panic!("expected sum, got {other:?}"),
                }
            }
            other => panic!("expected objective, got {other:?}"),
        }
    }

    #[test]
    fn chance_constraint() {
        let ast = parse_src("chance(3/4) x >= w;").unwrap();
        match &ast.items[0] {
            Item::Constraint { chance, body, .. } => {
                let prob = chance.expect("chance prefix");
                assert_eq!((prob.num, prob.den), (3, 4));
                assert!(matches!(body.kind, AstExprKind::Cmp(CmpOp::Ge, _, _)));
            }
            other => panic!("expected constraint, got {other:?}"),
        }
    }

    #[test]
    fn missing_upper_bound() {
        let errs = parse_src("int x in 0..;").unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].code, codes::PARSE_EXPECTED);
        assert!(errs[0].message.contains("integer"));
        assert_eq!(errs[0].pos.unwrap().col, 13);
    }

    #[test]
    fn recovery_reports_multiple_errors() {
        let errs = parse_src("int x in 0..;\nint y in 0..;\nint z in 0..1 stage 1;").unwrap_err();
        assert_eq!(errs.len(), 2);
        assert_eq!(errs[0].pos.unwrap().line, 1);
        assert_eq!(errs[1].pos.unwrap().line, 2);
    }

    #[test]
    fn eof_mid_item() {
        let errs = parse_src("int x in 0..1 stage 1").unwrap_err();
        assert_eq!(errs[0].code, codes::PARSE_EOF);
    }

    #[test]
    fn decimal_probability_keeps_leading_zeros() {
        let ast = parse_src("stoch w in {0:0.05, 1:0.95} stage 1;").unwrap();
        match &ast.items[0] {
            Item::Stochastic { outcomes, .. } => {
                assert_eq!((outcomes[0].1.num, outcomes[0].1.den), (5, 100));
                assert_eq!((outcomes[1].1.num, outcomes[1].1.den), (95, 100));
            }
            other => panic!("expected stochastic, got {other:?}"),
        }
    }

    #[test]
    fn negative_literal_in_expression() {
        let ast = parse_src("x + -3 <= -2*y;").unwrap();
        match &ast.items[0] {
            Item::Constraint { body, .. } => match &body.kind {
                AstExprKind::Cmp(CmpOp::Le, lhs, rhs) => {
                    assert!(
                        matches!(&lhs.kind, AstExprKind::Add(_, r) if r.kind == AstExprKind::Int(-3))
                    );
                    assert!(matches!(&rhs.kind, AstExprKind::Mul(-2, _)));
                }
                other => panic!("expected comparison, got {other:?}"),
            },
            other => panic!("expected constraint, got {other:?}"),
        }
    }

    #[test]
    fn parenthesized_expression() {
        let ast = parse_src("2*(x + y) = 4;").unwrap();
        match &ast.items[0] {
            Item::Constraint { body, .. } => {
                assert!(matches!(&body.kind, AstExprKind::Cmp(CmpOp::Eq, l, _)
                    if matches!(&l.kind, AstExprKind::Mul(2, inner)
                        if matches!(inner.kind, AstExprKind::Add(_, _)))));
            }
            other => panic!("expected constraint, got {other:?}"),
        }
    }

    #[test]
    fn spans_nest() {
        let ast = parse_src("chance(1/2) x + 1 >= w;").unwrap();
        match &ast.items[0] {
            Item::Constraint { body, span, .. } => {
                assert!(span.contains(body.span));
                if let AstExprKind::Cmp(_, l, r) = &body.kind {
                    assert!(body.span.contains(l.span));
                    assert!(body.span.contains(r.span));
                }
            }
            other => panic!("expected constraint, got {other:?}"),
        }
    }

    #[test]
    fn determinism() {
        let src =
            "int x in 0..2 stage 1;\nstoch w in {0:1/2, 1:1/2} stage 1;\nchance(1/2) x = w;\n";
        assert_eq!(parse_src(src).unwrap(), parse_src(src).unwrap());
    }
}
