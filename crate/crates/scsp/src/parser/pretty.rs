//! Renders a model back to `.scsp` source. Re-parsing the output yields a
//! structurally identical model, which the round-trip tests rely on.

use std::fmt::Write;

use crate::model::{Aggregator, ConstraintKind, Expr, Sense, StochasticModel};
use crate::rational::Rational;

// Grammar precedence levels, loosest to tightest.
const PREC_OR: u8 = 0;
const PREC_AND: u8 = 1;
const PREC_NOT: u8 = 2;
const PREC_CMP: u8 = 3;
const PREC_SUM: u8 = 4;
const PREC_TERM: u8 = 5;
const PREC_ATOM: u8 = 6;

fn prob(r: Rational) -> String {
    // Probability positions require the explicit `a/b` form.
    format!("{}/{}", r.numer(), r.denom())
}

fn write_expr(out: &mut String, model: &StochasticModel, expr: &Expr, min_prec: u8) {
    let prec = match expr {
        Expr::Const(_) | Expr::Decision(_) | Expr::Stoch(_) => PREC_ATOM,
        Expr::Mul(..) => PREC_TERM,
        Expr::Add(..) | Expr::Sub(..) => PREC_SUM,
        Expr::Cmp(..) => PREC_CMP,
        Expr::Not(..) => PREC_NOT,
        Expr::And(..) => PREC_AND,
        Expr::Or(..) | Expr::Implies(..) => PREC_OR,
    };
    if prec < min_prec {
        out.push('(');
        write_expr(out, model, expr, PREC_OR);
        out.push(')');
        return;
    }
    match expr {
        Expr::Const(v) => {
            let _ = write!(out, "{v}");
        }
        Expr::Decision(i) => out.push_str(&model.decisions[*i].name),
        Expr::Stoch(i) => out.push_str(&model.stochastics[*i].name),
        Expr::Add(a, b) => {
            write_expr(out, model, a, PREC_SUM);
            out.push_str(" + ");
            write_expr(out, model, b, PREC_TERM);
        }
        Expr::Sub(a, b) => {
            write_expr(out, model, a, PREC_SUM);
            out.push_str(" - ");
            write_expr(out, model, b, PREC_TERM);
        }
        Expr::Mul(k, e) => {
            let _ = write!(out, "{k}*");
            write_expr(out, model, e, PREC_ATOM);
        }
        Expr::Cmp(op, a, b) => {
            write_expr(out, model, a, PREC_SUM);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(out, model, b, PREC_SUM);
        }
        Expr::Not(e) => {
            out.push('!');
            write_expr(out, model, e, PREC_CMP);
        }
        Expr::And(a, b) => {
            write_expr(out, model, a, PREC_AND);
            out.push_str(" /\\ ");
            write_expr(out, model, b, PREC_NOT);
        }
        Expr::Or(a, b) => {
            write_expr(out, model, a, PREC_OR);
            out.push_str(" \\/ ");
            write_expr(out, model, b, PREC_AND);
        }
        // The surface grammar has no implication; print the equivalent form.
        Expr::Implies(a, b) => {
            let desugared = Expr::or(Expr::not((**a).clone()), (**b).clone());
            write_expr(out, model, &desugared, min_prec);
        }
    }
}

/// Renders the model as `.scsp` source text.
pub fn to_source(model: &StochasticModel) -> String {
    let mut out = String::new();
    for d in &model.decisions {
        let _ = writeln!(
            out,
            "int {} in {}..{} stage {};",
            d.name, d.lo, d.hi, d.stage
        );
    }
    for s in &model.stochastics {
        let outcomes: Vec<String> = s
            .dist
            .iter()
            .map(|(value, p)| format!("{value}:{}", prob(*p)))
            .collect();
        let _ = writeln!(
            out,
            "stoch {} in {{{}}} stage {};",
            s.name,
            outcomes.join(", "),
            s.stage
        );
    }
    for c in &model.constraints {
        match &c.kind {
            ConstraintKind::Hard => {}
            ConstraintKind::Chance(theta) => {
                let _ = write!(out, "chance({}) ", prob(*theta));
            }
        }
        write_expr(&mut out, model, &c.body, PREC_OR);
        out.push_str(";\n");
    }
    if let Some(obj) = &model.objective {
        let sense = match obj.sense {
            Sense::Maximize => "maximize",
            Sense::Minimize => "minimize",
        };
        let agg = match obj.aggregator {
            Aggregator::Expected => "expected",
            Aggregator::Worst => "worst",
            Aggregator::Best => "best",
            Aggregator::Spread => "spread",
        };
        let _ = write!(out, "{sense} {agg} ");
        write_expr(&mut out, model, &obj.body, PREC_OR);
        out.push_str(";\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::parse_model;
    use super::*;

    fn roundtrip(src: &str) {
        let model = parse_model(src).unwrap();
        let printed = to_source(&model);
        let reparsed = parse_model(&printed)
            .unwrap_or_else(|e| panic!("re-parse of {printed:?} failed: {e:?}"));
        assert_eq!(model, reparsed, "printed form: {printed}");
    }

    #[test]
    fn roundtrip_simple() {
        roundtrip(
            "int x in 0..1 stage 1;\n\
             stoch w in {0:1/2, 1:1/2} stage 1;\n\
             chance(1/2) x = w;\n\
             maximize expected x + w;\n",
        );
    }

    #[test]
    fn roundtrip_logic_and_precedence() {
        roundtrip(
            "int x in 0..3 stage 1;\n\
             int y in 0..3 stage 1;\n\
             stoch w in {1:0.25, 2:0.75} stage 1;\n\
             !(x = 0) /\\ (y < w \\/ 2*x - 1 >= y);\n\
             x - (y - 1) <= 3;\n\
             minimize worst 3*x + 2*y - w;\n",
        );
    }

    #[test]
    fn decimals_print_as_exact_fractions() {
        let model = parse_model("stoch w in {0:0.25, 1:0.75} stage 1;\nw >= 0;\n").unwrap();
        let printed = to_source(&model);
        assert!(printed.contains("0:1/4"), "got: {printed}");
        assert!(printed.contains("1:3/4"), "got: {printed}");
    }
}
