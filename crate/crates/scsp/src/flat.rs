//! The conventional finite-domain CSP the compiler targets, plus the
//! line-oriented `scsp-flat 1` dump format used to exchange instances with
//! external tools.

use std::fmt::Write as _;

use thiserror::Error;

use crate::model::Sense;

/// Index of a flat variable; ids are dense and assigned in creation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinOp {
    Eq,
    Le,
}

impl LinOp {
    fn as_str(&self) -> &'static str {
        match self {
            LinOp::Eq => "eq",
            LinOp::Le => "le",
        }
    }
}

/// Flat constraints: integer-linear (optionally reified) plus min/max links.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlatConstraint {
    /// `Σ aᵢ·xᵢ (=|≤) c`
    Lin {
        op: LinOp,
        rhs: i64,
        terms: Vec<(i64, VarId)>,
    },
    /// `b ⇔ (Σ aᵢ·xᵢ (=|≤) c)`, with `b` a 0/1 variable.
    Reif {
        b: VarId,
        op: LinOp,
        rhs: i64,
        terms: Vec<(i64, VarId)>,
    },
    /// `y = min(xs)`
    Min { y: VarId, xs: Vec<VarId> },
    /// `y = max(xs)`
    Max { y: VarId, xs: Vec<VarId> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Objective {
    pub sense: Sense,
    pub var: VarId,
    /// Reported value is `var / scale`, exact.
    pub scale: i64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FlatCsp {
    /// Inclusive domains, indexed by `VarId`.
    pub vars: Vec<(i64, i64)>,
    pub constraints: Vec<FlatConstraint>,
    pub objective: Option<Objective>,
}

impl FlatCsp {
    pub fn new() -> FlatCsp {
        FlatCsp::default()
    }

    pub fn new_var(&mut self, lo: i64, hi: i64) -> VarId {
        let id = VarId(self.vars.len());
        self.vars.push((lo, hi));
        id
    }

    pub fn new_bool(&mut self) -> VarId {
        self.new_var(0, 1)
    }

    pub fn push(&mut self, constraint: FlatConstraint) {
        self.constraints.push(constraint);
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    /// Checks that every constraint only references declared variables and
    /// that reified booleans have domain [0, 1].
    pub fn well_formed(&self) -> bool {
        let ok_var = |v: &VarId| v.0 < self.vars.len();
        let ok = self.constraints.iter().all(|c| match c {
            FlatConstraint::Lin { terms, .. } => terms.iter().all(|(_, v)| ok_var(v)),
            FlatConstraint::Reif { b, terms, .. } => {
                ok_var(b) && self.vars[b.0] == (0, 1) && terms.iter().all(|(_, v)| ok_var(v))
            }
            FlatConstraint::Min { y, xs } | FlatConstraint::Max { y, xs } => {
                ok_var(y) && !xs.is_empty() && xs.iter().all(ok_var)
            }
        });
        ok && self.objective.is_none_or(|o| ok_var(&o.var) && o.scale > 0)
    }
}

fn write_terms(out: &mut String, terms: &[(i64, VarId)]) {
    let _ = write!(out, " {}", terms.len());
    for (a, x) in terms {
        let _ = write!(out, " {a} {}", x.0);
    }
}

/// Serializes a flat CSP in the `scsp-flat 1` format. `comments` are emitted
/// verbatim (each prefixed with `# `) right after the header; the compiler
/// uses them for scenario and decision mapping metadata.
pub fn write_flat(csp: &FlatCsp, comments: &[String]) -> String {
    let mut out = String::new();
    out.push_str("scsp-flat 1\n");
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    for (id, (lo, hi)) in csp.vars.iter().enumerate() {
        let _ = writeln!(out, "var {id} {lo} {hi}");
    }
    for c in &csp.constraints {
        match c {
            FlatConstraint::Lin { op, rhs, terms } => {
                let _ = write!(out, "lin {} {rhs}", op.as_str());
                write_terms(&mut out, terms);
                out.push('\n');
            }
            FlatConstraint::Reif { b, op, rhs, terms } => {
                let _ = write!(out, "reif {} {} {rhs}", b.0, op.as_str());
                write_terms(&mut out, terms);
                out.push('\n');
            }
            FlatConstraint::Min { y, xs } => {
                let _ = write!(out, "min {} {}", y.0, xs.len());
                for x in xs {
                    let _ = write!(out, " {}", x.0);
                }
                out.push('\n');
            }
            FlatConstraint::Max { y, xs } => {
                let _ = write!(out, "max {} {}", y.0, xs.len());
                for x in xs {
                    let _ = write!(out, " {}", x.0);
                }
                out.push('\n');
            }
        }
    }
    if let Some(obj) = csp.objective {
        let sense = match obj.sense {
            Sense::Maximize => "maximize",
            Sense::Minimize => "minimize",
        };
        let _ = writeln!(out, "objective {sense} {} {}", obj.var.0, obj.scale);
    }
    out
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum FlatParseError {
    #[error("line 1: expected header `scsp-flat 1`")]
    BadHeader,
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

fn malformed(line: usize, message: impl Into<String>) -> FlatParseError {
    FlatParseError::Malformed {
        line,
        message: message.into(),
    }
}

struct FieldReader<'a> {
    fields: std::str::SplitWhitespace<'a>,
    line: usize,
}

impl<'a> FieldReader<'a> {
    fn int(&mut self) -> Result<i64, FlatParseError> {
        let field = self
            .fields
            .next()
            .ok_or_else(|| malformed(self.line, "missing field"))?;
        field
            .parse()
            .map_err(|_| malformed(self.line, format!("expected integer, got `{field}`")))
    }

    fn var(&mut self, n_vars: usize) -> Result<VarId, FlatParseError> {
        let id = self.int()?;
        if id < 0 || id as usize >= n_vars {
            return Err(malformed(
                self.line,
                format!("variable id {id} out of range"),
            ));
        }
        Ok(VarId(id as usize))
    }

    fn op(&mut self) -> Result<LinOp, FlatParseError> {
        match self.fields.next() {
            Some("eq") => Ok(LinOp::Eq),
            Some("le") => Ok(LinOp::Le),
            other => Err(malformed(
                self.line,
                format!("expected `eq` or `le`, got `{}`", other.unwrap_or("")),
            )),
        }
    }

    fn terms(&mut self, n_vars: usize) -> Result<Vec<(i64, VarId)>, FlatParseError> {
        let k = self.int()?;
        if k < 0 {
            return Err(malformed(self.line, "negative term count"));
        }
        let mut terms = Vec::with_capacity(k as usize);
        for _ in 0..k {
            let a = self.int()?;
            let x = self.var(n_vars)?;
            terms.push((a, x));
        }
        Ok(terms)
    }

    fn var_list(&mut self, n_vars: usize) -> Result<Vec<VarId>, FlatParseError> {
        let k = self.int()?;
        if k < 1 {
            return Err(malformed(self.line, "min/max needs at least one argument"));
        }
        let mut xs = Vec::with_capacity(k as usize);
        for _ in 0..k {
            xs.push(self.var(n_vars)?);
        }
        Ok(xs)
    }

    fn finish(mut self) -> Result<(), FlatParseError> {
        if self.fields.next().is_some() {
            return Err(malformed(self.line, "trailing fields"));
        }
        Ok(())
    }
}

/// Parses the `scsp-flat 1` format. Comment (`#`) and blank lines are
/// ignored; `var` lines must use dense ascending ids starting at 0.
pub fn parse_flat(text: &str) -> Result<FlatCsp, FlatParseError> {
    let mut lines = text.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, line)) if line.trim().is_empty() => continue,
            Some((_, line)) => break line,
            None => return Err(FlatParseError::BadHeader),
        }
    };
    if header.trim() != "scsp-flat 1" {
        return Err(FlatParseError::BadHeader);
    }

    let mut csp = FlatCsp::new();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let keyword = fields.next().expect("non-empty line");
        let mut reader = FieldReader {
            fields,
            line: line_no,
        };
        match keyword {
            "var" => {
                let id = reader.int()?;
                if id as usize != csp.vars.len() {
                    return Err(malformed(
                        line_no,
                        format!("expected var id {}, got {id}", csp.vars.len()),
                    ));
                }
                let lo = reader.int()?;
                let hi = reader.int()?;
                reader.finish()?;
                csp.new_var(lo, hi);
            }
            "lin" => {
                let op = reader.op()?;
                let rhs = reader.int()?;
                let terms = reader.terms(csp.vars.len())?;
                reader.finish()?;
                csp.push(FlatConstraint::Lin { op, rhs, terms });
            }
            "reif" => {
                let b = reader.var(csp.vars.len())?;
                let op = reader.op()?;
                let rhs = reader.int()?;
                let terms = reader.terms(csp.vars.len())?;
                reader.finish()?;
                csp.push(FlatConstraint::Reif { b, op, rhs, terms });
            }
            "min" => {
                let y = reader.var(csp.vars.len())?;
                let xs = reader.var_list(csp.vars.len())?;
                reader.finish()?;
                csp.push(FlatConstraint::Min { y, xs });
            }
            "max" => {
                let y = reader.var(csp.vars.len())?;
                let xs = reader.var_list(csp.vars.len())?;
                reader.finish()?;
                csp.push(FlatConstraint::Max { y, xs });
            }
            "objective" => {
                let sense = match reader.fields.next() {
                    Some("maximize") => Sense::Maximize,
                    Some("minimize") => Sense::Minimize,
                    other => {
                        return Err(malformed(
                            line_no,
                            format!(
                                "expected `maximize` or `minimize`, got `{}`",
                                other.unwrap_or("")
                            ),
                        ))
                    }
                };
                let var = reader.var(csp.vars.len())?;
                let scale = reader.int()?;
                reader.finish()?;
                if scale <= 0 {
                    return Err(malformed(line_no, "objective scale must be positive"));
                }
                if csp.objective.is_some() {
                    return Err(malformed(line_no, "duplicate objective line"));
                }
                csp.objective = Some(Objective { sense, var, scale });
            }
            other => {
                return Err(malformed(line_no, format!("unknown keyword `{other}`")));
            }
        }
    }
    Ok(csp)
}
