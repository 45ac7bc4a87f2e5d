use thiserror::Error;

use super::ast::{CmpOp, ConstraintExpr, Literal, Number};
use super::lexer::{Token, TokenKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at offset {offset}: expected {expected}")]
pub struct ParseError {
    pub offset: usize,
    pub expected: String,
}

/// Recursive-descent parser over a token slice.
///
/// ```text
/// expr     := and_term (OR and_term)*
/// and_term := unary (AND unary)*
/// unary    := NOT unary | primary
/// primary  := '(' expr ')' | Ident CmpOp literal | Ident BETWEEN number AND number
/// ```
pub fn parse(tokens: &[Token]) -> Result<ConstraintExpr, ParseError> {
    let mut p = Parser { tokens, pos: 0 };
    let expr = p.expr()?;
    if p.pos < tokens.len() {
        return Err(p.error("end of input or a boolean operator"));
    }
    Ok(expr)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn offset(&self) -> usize {
        match self.peek() {
            Some(t) => t.offset,
            None => self.tokens.last().map(|t| t.offset + t.len).unwrap_or(0),
        }
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError {
            offset: self.offset(),
            expected: expected.to_owned(),
        }
    }

    fn eat(&mut self, kind: TokenKind) -> Option<&Token> {
        let t = self.tokens.get(self.pos).filter(|t| t.kind == kind)?;
        self.pos += 1;
        Some(t)
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> Result<&Token, ParseError> {
        if self.peek().is_some_and(|t| t.kind == kind) {
            self.pos += 1;
            Ok(&self.tokens[self.pos - 1])
        } else {
            Err(self.error(what))
        }
    }

    fn expr(&mut self) -> Result<ConstraintExpr, ParseError> {
        let mut terms = vec![self.and_term()?];
        while self.eat(TokenKind::Or).is_some() {
            terms.push(self.and_term()?);
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { ConstraintExpr::Or(terms) })
    }

    fn and_term(&mut self) -> Result<ConstraintExpr, ParseError> {
        let mut terms = vec![self.unary()?];
        while self.eat(TokenKind::And).is_some() {
            terms.push(self.unary()?);
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { ConstraintExpr::And(terms) })
    }

    fn unary(&mut self) -> Result<ConstraintExpr, ParseError> {
        if self.eat(TokenKind::Not).is_some() {
            return Ok(ConstraintExpr::Not(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<ConstraintExpr, ParseError> {
        if self.eat(TokenKind::LParen).is_some() {
            let inner = self.expr()?;
            self.expect(TokenKind::RParen, "')'")?;
            return Ok(inner);
        }
        let property = self
            .expect(TokenKind::Ident, "property name, NOT or '('")?
            .text
            .clone();
        if self.eat(TokenKind::Between).is_some() {
            let low = self.number()?;
            self.expect(TokenKind::And, "AND")?;
            let high = self.number()?;
            return Ok(ConstraintExpr::Between {
                property,
                low,
                high,
            });
        }
        let op_tok = self.expect(TokenKind::CmpOp, "comparison operator or BETWEEN")?;
        let op = CmpOp::parse(&op_tok.text).expect("lexer only emits known operators");
        let literal = match self.peek() {
            Some(t) if t.kind == TokenKind::String => {
                let s = t.text.clone();
                self.pos += 1;
                Literal::Text(s)
            }
            Some(t) if t.kind == TokenKind::Number => Literal::Number(self.number()?),
            _ => return Err(self.error("literal")),
        };
        Ok(ConstraintExpr::Comparison {
            property,
            op,
            literal,
        })
    }

    fn number(&mut self) -> Result<Number, ParseError> {
        let offset = self.offset();
        let tok = self.expect(TokenKind::Number, "number")?;
        parse_number(&tok.text).ok_or(ParseError {
            offset,
            expected: "number".to_owned(),
        })
    }
}

fn parse_number(text: &str) -> Option<Number> {
    let plain = text.bytes().all(|b| b.is_ascii_digit() || b == b'-');
    if plain {
        if let Ok(i) = text.parse::<i64>() {
            return Some(Number::Integer(i));
        }
    }
    let r = text.parse::<f64>().ok()?;
    r.is_finite().then_some(Number::Real(r))
}
