//! Lexer for the `.scsp` modeling language.

use crate::diag::{codes, Diagnostic, Pos};

pub const KEYWORDS: &[&str] = &[
    "int", "in", "stage", "stoch", "chance", "maximize", "minimize", "expected", "worst", "best",
    "spread",
];

/// Two-character symbols, tried before single characters (maximal munch).
const SYMBOLS2: &[&str] = &["..", "<=", ">=", "!=", "/\\", "\\/"];
const SYMBOLS1: &[char] = &[
    ';', ',', ':', '(', ')', '{', '}', '+', '-', '*', '/', '.', '=', '<', '>', '!',
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Keyword,
    Ident,
    Int,
    Symbol,
    Eof,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub line: u32,
    pub col: u32,
}

impl Token {
    pub fn pos(&self) -> Pos {
        Pos::new(self.line, self.col)
    }

    pub fn is_kw(&self, kw: &str) -> bool {
        self.kind == TokenKind::Keyword && self.text == kw
    }

    pub fn is_sym(&self, sym: &str) -> bool {
        self.kind == TokenKind::Symbol && self.text == sym
    }

    /// Printable description used in parse diagnostics.
    pub fn describe(&self) -> String {
        match self.kind {
            TokenKind::Eof => "end of input".to_string(),
            _ => format!("`{}`", self.text),
        }
    }
}

/// Lexes source text into tokens ending with an EOF token. Comments (`//` to
/// end of line) and whitespace are skipped. Integers are unsigned decimal
/// digit runs; a leading `-` is a separate symbol token. Any character
/// outside the language alphabet stops lexing with a `LEX_CHAR` diagnostic.
pub fn tokenize(text: &str) -> Result<Vec<Token>, Diagnostic> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut line: u32 = 1;
    let mut col: u32 = 1;

    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        // Line comment.
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let len = (i - start) as u32;
            tokens.push(Token {
                kind: TokenKind::Int,
                text,
                line,
                col,
            });
            col += len;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let len = (i - start) as u32;
            let kind = if KEYWORDS.contains(&text.as_str()) {
                TokenKind::Keyword
            } else {
                TokenKind::Ident
            };
            tokens.push(Token {
                kind,
                text,
                line,
                col,
            });
            col += len;
            continue;
        }
        // Two-character symbols before one-character ones.
        if i + 1 < chars.len() {
            let pair: String = chars[i..i + 2].iter().collect();
            if SYMBOLS2.contains(&pair.as_str()) {
                tokens.push(Token {
                    kind: TokenKind::Symbol,
                    text: pair,
                    line,
                    col,
                });
                i += 2;
                col += 2;
                continue;
            }
        }
        if SYMBOLS1.contains(&c) {
            tokens.push(Token {
                kind: TokenKind::Symbol,
                text: c.to_string(),
                line,
                col,
            });
            i += 1;
            col += 1;
            continue;
        }
        return Err(Diagnostic::at(
            codes::LEX_CHAR,
            Pos::new(line, col),
            format!("unexpected character `{c}`"),
        ));
    }

    tokens.push(Token {
        kind: TokenKind::Eof,
        text: String::new(),
        line,
        col,
    });
    Ok(tokens)
}
