use std::fmt;

use crate::scalar::format_real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "=" => CmpOp::Eq,
            "!=" | "<>" => CmpOp::Ne,
            "<" => CmpOp::Lt,
            "<=" => CmpOp::Le,
            ">" => CmpOp::Gt,
            ">=" => CmpOp::Ge,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn apply<T: PartialOrd + ?Sized>(self, lhs: &T, rhs: &T) -> bool {
        match self {
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Ge => lhs >= rhs,
        }
    }
}

/// A numeric literal as written: plain digits are integers, anything with a
/// fraction or exponent (or beyond the i64 range) is real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Number {
    Integer(i64),
    Real(f64),
}

impl Number {
    pub fn as_f64(self) -> f64 {
        match self {
            Number::Integer(i) => i as f64,
            Number::Real(r) => r,
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Integer(i) => write!(f, "{i}"),
            Number::Real(r) => f.write_str(&format_real(*r)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Number(Number),
    Text(String),
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Number(n) => n.fmt(f),
            Literal::Text(s) => write!(f, "'{}'", s.replace('\'', "''")),
        }
    }
}

/// Untyped constraint tree as produced by the parser.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintExpr {
    Comparison {
        property: String,
        op: CmpOp,
        literal: Literal,
    },
    Between {
        property: String,
        low: Number,
        high: Number,
    },
    Not(Box<ConstraintExpr>),
    And(Vec<ConstraintExpr>),
    Or(Vec<ConstraintExpr>),
}

impl ConstraintExpr {
    pub fn cmp(property: &str, op: CmpOp, literal: Literal) -> Self {
        ConstraintExpr::Comparison {
            property: property.to_owned(),
            op,
            literal,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            ConstraintExpr::Comparison { .. } | ConstraintExpr::Between { .. } => 1,
            ConstraintExpr::Not(c) => 1 + c.depth(),
            ConstraintExpr::And(cs) | ConstraintExpr::Or(cs) => {
                1 + cs.iter().map(Self::depth).max().unwrap_or(0)
            }
        }
    }

    fn fmt_operand(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintExpr::And(_) | ConstraintExpr::Or(_) => write!(f, "({self})"),
            _ => write!(f, "{self}"),
        }
    }
}

/// Renders query text that parses back to the same tree.
impl fmt::Display for ConstraintExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintExpr::Comparison {
                property,
                op,
                literal,
            } => write!(f, "{property} {} {literal}", op.as_str()),
            ConstraintExpr::Between {
                property,
                low,
                high,
            } => write!(f, "{property} BETWEEN {low} AND {high}"),
            ConstraintExpr::Not(c) => {
                f.write_str("NOT ")?;
                c.fmt_operand(f)
            }
            ConstraintExpr::And(cs) | ConstraintExpr::Or(cs) => {
                let sep = if matches!(self, ConstraintExpr::And(_)) { " AND " } else { " OR " };
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    c.fmt_operand(f)?;
                }
                Ok(())
            }
        }
    }
}
