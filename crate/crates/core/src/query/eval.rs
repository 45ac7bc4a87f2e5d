use super::typecheck::TypedExpr;
use crate::scalar::Scalar;

/// Evaluates a typed constraint against one row given in schema order.
///
/// Reals compare exactly. A value whose tag disagrees with the typed
/// literal never matches a comparison; typechecking against the row's own
/// schema rules that out.
pub fn evaluate(expr: &TypedExpr, row: &[Scalar]) -> bool {
    match expr {
        TypedExpr::Compare { column, op, value } => match (&row[*column], value) {
            (Scalar::Real(x), Scalar::Real(v)) => op.apply(x, v),
            (Scalar::Integer(x), Scalar::Integer(v)) => op.apply(x, v),
            (Scalar::Text(x), Scalar::Text(v)) => op.apply(x.as_str(), v.as_str()),
            _ => false,
        },
        TypedExpr::Between { column, low, high } => match (&row[*column], low, high) {
            (Scalar::Real(x), Scalar::Real(lo), Scalar::Real(hi)) => lo <= x && x <= hi,
            (Scalar::Integer(x), Scalar::Integer(lo), Scalar::Integer(hi)) => lo <= x && x <= hi,
            _ => false,
        },
        TypedExpr::Not(c) => !evaluate(c, row),
        TypedExpr::And(cs) => cs.iter().all(|c| evaluate(c, row)),
        TypedExpr::Or(cs) => cs.iter().any(|c| evaluate(c, row)),
    }
}
