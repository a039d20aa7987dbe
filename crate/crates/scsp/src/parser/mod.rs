//! Front end for the `.scsp` modeling language: lexer, recursive-descent
//! parser, lowering to the model IR, and a pretty-printer.

pub mod ast;
pub mod lower;
pub mod parse;
pub mod pretty;
pub mod token;

pub use ast::Ast;
pub use lower::lower;
pub use parse::parse;
pub use pretty::to_source;
pub use token::{tokenize, Token, TokenKind};

use crate::diag::Diagnostic;
use crate::model::StochasticModel;

/// Full front-end pipeline: tokenize, parse, lower, validate.
pub fn parse_model(src: &str) -> Result<StochasticModel, Vec<Diagnostic>> {
    let tokens = tokenize(src).map_err(|d| vec![d])?;
    let ast = parse(&tokens)?;
    lower(&ast)
}
