//! The cutout constraint language.
//!
//! ```text
//! expr     := and_term (OR and_term)*
//! and_term := unary (AND unary)*
//! unary    := NOT unary | primary
//! primary  := '(' expr ')' | ident cmp literal | ident BETWEEN number AND number
//! cmp      := = | != | <> | < | <= | > | >=
//! ```
//!
//! Keywords are case-insensitive, strings are single-quoted with `''` as an
//! escaped quote, and numbers are `-?digits(.digits)?([eE][+-]?digits)?`.

mod ast;
mod eval;
mod lexer;
mod parser;
mod plan;
mod rowset;
mod typecheck;

pub use ast::{CmpOp, ConstraintExpr, Literal, Number};
pub use eval::evaluate;
pub use lexer::{tokenize, LexError, Token, TokenKind};
pub use parser::{parse, ParseError};
pub use plan::{select_rows, select_set};
pub use rowset::RowSet;
pub use typecheck::{typecheck, TypeCheckError, TypedExpr};

use thiserror::Error;

use crate::simdm::PropertyDef;

/// Any failure turning query text into a typed expression.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QueryError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Type(#[from] TypeCheckError),
}

impl QueryError {
    /// Byte offset into the query text, for syntax errors.
    pub fn offset(&self) -> Option<usize> {
        match self {
            QueryError::Lex(e) => Some(e.offset),
            QueryError::Parse(e) => Some(e.offset),
            QueryError::Type(_) => None,
        }
    }
}

/// Tokenizes, parses and typechecks in one step.
pub fn compile(text: &str, schema: &[PropertyDef]) -> Result<TypedExpr, QueryError> {
    let tokens = tokenize(text)?;
    let expr = parse(&tokens)?;
    Ok(typecheck(&expr, schema)?)
}
