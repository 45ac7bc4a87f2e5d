//! In-memory column representations backing a dataset.

use std::ops::Bound;

use crate::scalar::{Datatype, Scalar};

/// Permutation of a column's rows sorted by value, ties broken by row id.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedIndex<T> {
    entries: Vec<(T, u64)>,
}

/// Numeric column element: totally ordered once NaN is excluded.
pub trait IndexValue: Copy + PartialOrd + std::fmt::Debug {
    fn same_bits(self, other: Self) -> bool;
}

impl IndexValue for f64 {
    fn same_bits(self, other: Self) -> bool {
        self.to_bits() == other.to_bits()
    }
}

impl IndexValue for i64 {
    fn same_bits(self, other: Self) -> bool {
        self == other
    }
}

impl<T: IndexValue> SortedIndex<T> {
    /// Values must not contain NaN.
    pub fn build(values: &[T]) -> Self {
        let mut entries: Vec<(T, u64)> = values.iter().copied().zip(0u64..).collect();
        // stable: equal values keep ascending row order
        entries.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("NaN in indexed column"));
        Self { entries }
    }

    pub fn from_entries(entries: Vec<(T, u64)>) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &[(T, u64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries whose value falls within the bounds, by binary search.
    pub fn range(&self, low: Bound<T>, high: Bound<T>) -> &[(T, u64)] {
        let e = &self.entries;
        let start = match low {
            Bound::Unbounded => 0,
            Bound::Included(v) => e.partition_point(|x| x.0 < v),
            Bound::Excluded(v) => e.partition_point(|x| x.0 <= v),
        };
        let end = match high {
            Bound::Unbounded => e.len(),
            Bound::Included(v) => e.partition_point(|x| x.0 <= v),
            Bound::Excluded(v) => e.partition_point(|x| x.0 < v),
        };
        if start >= end {
            &[]
        } else {
            &e[start..end]
        }
    }

    /// Checks that the index is a sorted permutation of `values`.
    pub fn verify(&self, values: &[T]) -> Result<(), String> {
        if self.entries.len() != values.len() {
            return Err(format!(
                "index has {} entries for {} rows",
                self.entries.len(),
                values.len()
            ));
        }
        let mut seen = vec![false; values.len()];
        for (i, &(v, row)) in self.entries.iter().enumerate() {
            let r = usize::try_from(row).ok().filter(|&r| r < values.len());
            let Some(r) = r else {
                return Err(format!("index entry {i} points at row {row}, out of range"));
            };
            if std::mem::replace(&mut seen[r], true) {
                return Err(format!("row {row} appears twice in index"));
            }
            if !v.same_bits(values[r]) {
                return Err(format!("index entry {i} disagrees with row {row}"));
            }
            if i > 0 {
                let (pv, prow) = self.entries[i - 1];
                let ordered = match pv.partial_cmp(&v) {
                    Some(std::cmp::Ordering::Less) => true,
                    Some(std::cmp::Ordering::Equal) => prow < row,
                    _ => false,
                };
                if !ordered {
                    return Err(format!("index entries {} and {i} out of order", i - 1));
                }
            }
        }
        Ok(())
    }
}

/// Raw column values in row order, before encoding.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnValues {
    Real(Vec<f64>),
    Integer(Vec<i64>),
    Text(Vec<String>),
}

impl ColumnValues {
    pub fn empty(dt: Datatype) -> Self {
        match dt {
            Datatype::Real => ColumnValues::Real(Vec::new()),
            Datatype::Integer => ColumnValues::Integer(Vec::new()),
            Datatype::Text => ColumnValues::Text(Vec::new()),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ColumnValues::Real(v) => v.len(),
            ColumnValues::Integer(v) => v.len(),
            ColumnValues::Text(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Appends a value; the tag must match the column.
    pub fn push(&mut self, value: Scalar) {
        match (self, value) {
            (ColumnValues::Real(v), Scalar::Real(x)) => v.push(x),
            (ColumnValues::Integer(v), Scalar::Integer(x)) => v.push(x),
            (ColumnValues::Text(v), Scalar::Text(x)) => v.push(x),
            _ => panic!("value tag does not match column"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Real {
        values: Vec<f64>,
        index: SortedIndex<f64>,
    },
    Integer {
        values: Vec<i64>,
        index: SortedIndex<i64>,
    },
    /// Dictionary-encoded; `dict` is sorted and unique.
    Text { dict: Vec<String>, codes: Vec<u64> },
}

impl Column {
    pub fn build(values: ColumnValues) -> Self {
        match values {
            ColumnValues::Real(values) => Column::Real {
                index: SortedIndex::build(&values),
                values,
            },
            ColumnValues::Integer(values) => Column::Integer {
                index: SortedIndex::build(&values),
                values,
            },
            ColumnValues::Text(values) => {
                let mut dict = values.clone();
                dict.sort_unstable();
                dict.dedup();
                let codes = values
                    .iter()
                    .map(|v| dict.binary_search(v).expect("value in dictionary") as u64)
                    .collect();
                Column::Text { dict, codes }
            }
        }
    }

    pub fn datatype(&self) -> Datatype {
        match self {
            Column::Real { .. } => Datatype::Real,
            Column::Integer { .. } => Datatype::Integer,
            Column::Text { .. } => Datatype::Text,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Column::Real { values, .. } => values.len(),
            Column::Integer { values, .. } => values.len(),
            Column::Text { codes, .. } => codes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn value(&self, row: usize) -> Scalar {
        match self {
            Column::Real { values, .. } => Scalar::Real(values[row]),
            Column::Integer { values, .. } => Scalar::Integer(values[row]),
            Column::Text { dict, codes } => Scalar::Text(dict[codes[row] as usize].clone()),
        }
    }

    /// Full consistency check of index or dictionary encoding.
    pub fn verify(&self) -> Result<(), String> {
        match self {
            Column::Real { values, index } => {
                if let Some(i) = values.iter().position(|v| !v.is_finite()) {
                    return Err(format!("non-finite value at row {i}"));
                }
                index.verify(values)
            }
            Column::Integer { values, index } => index.verify(values),
            Column::Text { dict, codes } => {
                if dict.windows(2).any(|w| w[0] >= w[1]) {
                    return Err("dictionary not sorted and unique".into());
                }
                match codes.iter().position(|&c| c >= dict.len() as u64) {
                    Some(i) => Err(format!("code out of dictionary range at row {i}")),
                    None => Ok(()),
                }
            }
        }
    }
}
