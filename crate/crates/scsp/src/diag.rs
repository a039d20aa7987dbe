//! Diagnostics with stable codes and source positions.

use std::fmt;

/// A 1-based line/column position in a source file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl Pos {
    pub fn new(line: u32, col: u32) -> Pos {
        Pos { line, col }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// A half-open source region `[start, end)` used by AST nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub start: Pos,
    pub end: Pos,
}

impl Span {
    pub fn new(start: Pos, end: Pos) -> Span {
        Span { start, end }
    }

    pub fn point(pos: Pos) -> Span {
        Span {
            start: pos,
            end: pos,
        }
    }

    /// True if `other` lies within `self`.
    pub fn contains(&self, other: Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn merge(self, other: Span) -> Span {
        Span {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }
}

/// Stable diagnostic codes. Tests and tooling match on these, never on the
/// human-readable message.
pub mod codes {
    pub const LEX_CHAR: &str = "LEX_CHAR";
    pub const PARSE_EXPECTED: &str = "PARSE_EXPECTED";
    pub const PARSE_EOF: &str = "PARSE_EOF";
    pub const NAME_DUP: &str = "NAME_DUP";
    pub const NAME_UNRESOLVED: &str = "NAME_UNRESOLVED";
    pub const OBJ_MULTI: &str = "OBJ_MULTI";
    pub const DIST_SUM: &str = "DIST_SUM";
    pub const DIST_PROB: &str = "DIST_PROB";
    pub const DIST_DUP: &str = "DIST_DUP";
    pub const DOM_EMPTY: &str = "DOM_EMPTY";
    pub const STAGE_RANGE: &str = "STAGE_RANGE";
    pub const STAGE_EMPTY: &str = "STAGE_EMPTY";
    pub const THETA_RANGE: &str = "THETA_RANGE";
    pub const EXPR_TYPE: &str = "EXPR_TYPE";
    pub const SIZE_LIMIT: &str = "SIZE_LIMIT";
}

/// What a model-level diagnostic is about, so front-ends can map it back to
/// a source location.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Subject {
    Var(String),
    /// 0-based constraint index in declaration order.
    Constraint(usize),
    Objective,
    Model,
}

/// One reported problem: a stable code, a message naming the offender, and a
/// position when the problem maps back to source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: &'static str,
    pub message: String,
    pub pos: Option<Pos>,
    pub subject: Option<Subject>,
}

impl Diagnostic {
    pub fn new(code: &'static str, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            code,
            message: message.into(),
            pos: None,
            subject: None,
        }
    }

    pub fn at(code: &'static str, pos: Pos, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            code,
            message: message.into(),
            pos: Some(pos),
            subject: None,
        }
    }

    pub fn with_pos(mut self, pos: Pos) -> Diagnostic {
        self.pos = Some(pos);
        self
    }

    pub fn about(mut self, subject: Subject) -> Diagnostic {
        self.subject = Some(subject);
        self
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pos {
            Some(pos) => write!(f, "error[{}] {}: {}", self.code, pos, self.message),
            None => write!(f, "error[{}]: {}", self.code, self.message),
        }
    }
}
