//! Index-backed evaluation of typed constraints over a dataset.
//!
//! Each leaf becomes a row set: numeric comparisons and BETWEEN use the
//! column's sorted index, text equality scans the dictionary codes. Sets
//! are intersected for AND, unioned for OR and complemented for NOT. The
//! result always equals a row-by-row [`evaluate`](super::evaluate).

use std::ops::Bound;

use super::ast::CmpOp;
use super::rowset::RowSet;
use super::typecheck::TypedExpr;
use crate::catalog::{Column, Dataset, IndexValue, SortedIndex};
use crate::scalar::Scalar;

/// Rows satisfying `expr`, ascending. `expr` must be typechecked against
/// the dataset's schema.
pub fn select_rows(expr: &TypedExpr, dataset: &Dataset) -> Vec<usize> {
    select_set(expr, dataset).to_vec()
}

pub fn select_set(expr: &TypedExpr, dataset: &Dataset) -> RowSet {
    let n = dataset.row_count();
    match expr {
        TypedExpr::Compare { column, op, value } => compare(dataset.column(*column), *op, value, n),
        TypedExpr::Between { column, low, high } => {
            match (dataset.column(*column), low, high) {
                (Column::Real { index, .. }, Scalar::Real(lo), Scalar::Real(hi)) => {
                    index_set(index, Bound::Included(*lo), Bound::Included(*hi), n)
                }
                (Column::Integer { index, .. }, Scalar::Integer(lo), Scalar::Integer(hi)) => {
                    index_set(index, Bound::Included(*lo), Bound::Included(*hi), n)
                }
                _ => RowSet::empty(n),
            }
        }
        TypedExpr::Not(c) => {
            let mut s = select_set(c, dataset);
            s.complement();
            s
        }
        TypedExpr::And(cs) => {
            let mut acc = RowSet::full(n);
            for c in cs {
                acc.intersect_with(&select_set(c, dataset));
            }
            acc
        }
        TypedExpr::Or(cs) => {
            let mut acc = RowSet::empty(n);
            for c in cs {
                acc.union_with(&select_set(c, dataset));
            }
            acc
        }
    }
}

fn index_set<T: IndexValue>(index: &SortedIndex<T>, lo: Bound<T>, hi: Bound<T>, n: usize) -> RowSet {
    let mut s = RowSet::empty(n);
    for &(_, row) in index.range(lo, hi) {
        s.insert(row as usize);
    }
    s
}

fn compare_index<T: IndexValue>(index: &SortedIndex<T>, op: CmpOp, v: T, n: usize) -> RowSet {
    use Bound::*;
    let (lo, hi) = match op {
        CmpOp::Eq | CmpOp::Ne => (Included(v), Included(v)),
        CmpOp::Lt => (Unbounded, Excluded(v)),
        CmpOp::Le => (Unbounded, Included(v)),
        CmpOp::Gt => (Excluded(v), Unbounded),
        CmpOp::Ge => (Included(v), Unbounded),
    };
    let mut s = index_set(index, lo, hi, n);
    if op == CmpOp::Ne {
        s.complement();
    }
    s
}

fn compare(column: &Column, op: CmpOp, value: &Scalar, n: usize) -> RowSet {
    match (column, value) {
        (Column::Real { index, .. }, Scalar::Real(v)) => compare_index(index, op, *v, n),
        (Column::Integer { index, .. }, Scalar::Integer(v)) => compare_index(index, op, *v, n),
        (Column::Text { dict, codes }, Scalar::Text(v)) => {
            let mut s = RowSet::empty(n);
            if let Ok(code) = dict.binary_search(v) {
                let code = code as u64;
                for (row, &c) in codes.iter().enumerate() {
                    if c == code {
                        s.insert(row);
                    }
                }
            }
            if op == CmpOp::Ne {
                s.complement();
            }
            s
        }
        _ => RowSet::empty(n),
    }
}
