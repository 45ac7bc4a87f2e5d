use thiserror::Error;

use super::ast::{CmpOp, ConstraintExpr, Literal, Number};
use crate::scalar::{Datatype, Scalar};
use crate::simdm::PropertyDef;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TypeCheckError {
    #[error("unknown property {name:?}")]
    UnknownProperty { name: String },
    #[error("type error on {property:?}: {detail}")]
    TypeError { property: String, detail: String },
}

/// A constraint resolved against a schema: properties are column positions
/// and literals carry the column's datatype.
#[derive(Debug, Clone, PartialEq)]
pub enum TypedExpr {
    Compare {
        column: usize,
        op: CmpOp,
        value: Scalar,
    },
    /// Both bounds share the column's numeric datatype.
    Between {
        column: usize,
        low: Scalar,
        high: Scalar,
    },
    Not(Box<TypedExpr>),
    And(Vec<TypedExpr>),
    Or(Vec<TypedExpr>),
}

pub fn typecheck(expr: &ConstraintExpr, schema: &[PropertyDef]) -> Result<TypedExpr, TypeCheckError> {
    Ok(match expr {
        ConstraintExpr::Comparison {
            property,
            op,
            literal,
        } => {
            let (column, def) = resolve(property, schema)?;
            let value = match (def.datatype, literal) {
                (Datatype::Text, Literal::Text(s)) => {
                    if !matches!(op, CmpOp::Eq | CmpOp::Ne) {
                        return Err(type_error(property, "text properties only support = and !="));
                    }
                    Scalar::Text(s.clone())
                }
                (Datatype::Text, Literal::Number(_)) => {
                    return Err(type_error(property, "text property compared with a number"))
                }
                (_, Literal::Text(_)) => {
                    return Err(type_error(property, "numeric property compared with a string"))
                }
                (dt, Literal::Number(n)) => coerce(property, dt, *n)?,
            };
            TypedExpr::Compare {
                column,
                op: *op,
                value,
            }
        }
        ConstraintExpr::Between {
            property,
            low,
            high,
        } => {
            let (column, def) = resolve(property, schema)?;
            if def.datatype == Datatype::Text {
                return Err(type_error(property, "BETWEEN needs a numeric property"));
            }
            TypedExpr::Between {
                column,
                low: coerce(property, def.datatype, *low)?,
                high: coerce(property, def.datatype, *high)?,
            }
        }
        ConstraintExpr::Not(c) => TypedExpr::Not(Box::new(typecheck(c, schema)?)),
        ConstraintExpr::And(cs) => TypedExpr::And(
            cs.iter().map(|c| typecheck(c, schema)).collect::<Result<_, _>>()?,
        ),
        ConstraintExpr::Or(cs) => TypedExpr::Or(
            cs.iter().map(|c| typecheck(c, schema)).collect::<Result<_, _>>()?,
        ),
    })
}

fn resolve<'a>(name: &str, schema: &'a [PropertyDef]) -> Result<(usize, &'a PropertyDef), TypeCheckError> {
    schema
        .iter()
        .enumerate()
        .find(|(_, p)| p.name == name)
        .ok_or_else(|| TypeCheckError::UnknownProperty {
            name: name.to_owned(),
        })
}

fn type_error(property: &str, detail: &str) -> TypeCheckError {
    TypeCheckError::TypeError {
        property: property.to_owned(),
        detail: detail.to_owned(),
    }
}

fn coerce(property: &str, dt: Datatype, n: Number) -> Result<Scalar, TypeCheckError> {
    match (dt, n) {
        (Datatype::Real, n) => Ok(Scalar::Real(n.as_f64())),
        (Datatype::Integer, Number::Integer(i)) => Ok(Scalar::Integer(i)),
        (Datatype::Integer, Number::Real(_)) => Err(type_error(
            property,
            "integer property compared with a non-integer literal",
        )),
        (Datatype::Text, _) => Err(type_error(property, "text property compared with a number")),
    }
}
