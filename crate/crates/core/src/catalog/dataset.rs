use std::collections::HashMap;
use std::ops::Bound;

use serde::{Deserialize, Serialize};

use super::column::{Column, ColumnValues};
use super::error::CatalogError;
use crate::scalar::Scalar;
use crate::simdm::PropertyDef;

/// What kind of per-object numeric series a dataset carries.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VectorRole {
    #[default]
    None,
    /// Spectral energy distribution: wavelength, flux.
    Sed,
    /// Evolutionary track: time, luminosity, mass.
    Track,
}

impl VectorRole {
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            VectorRole::None => &[],
            VectorRole::Sed => &["wavelength", "flux"],
            VectorRole::Track => &["time", "luminosity", "mass"],
        }
    }

    pub fn width(self) -> usize {
        self.columns().len()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            VectorRole::None => "none",
            VectorRole::Sed => "sed",
            VectorRole::Track => "track",
        }
    }
}

/// Backing bytes of the concatenated series file.
#[derive(Debug)]
pub(crate) enum SeriesBytes {
    Mapped(memmap2::Mmap),
    Owned(Vec<u8>),
}

impl SeriesBytes {
    fn bytes(&self) -> &[u8] {
        match self {
            SeriesBytes::Mapped(m) => m,
            SeriesBytes::Owned(v) => v,
        }
    }
}

/// Per-object numeric series: one block of `width * points` reals per
/// object, column-major, addressed by `(start, points)` in row order.
#[derive(Debug)]
pub struct VectorStore {
    pub(crate) role: VectorRole,
    pub(crate) offsets: Vec<(u64, u64)>,
    pub(crate) data: SeriesBytes,
}

impl VectorStore {
    /// Builds an in-memory store from per-row series, each given as columns.
    pub fn from_series(role: VectorRole, series: &[Vec<Vec<f64>>]) -> Self {
        let mut offsets = Vec::with_capacity(series.len());
        let mut data = Vec::new();
        let mut start = 0u64;
        for s in series {
            let points = s.first().map_or(0, Vec::len) as u64;
            offsets.push((start, points));
            for col in s {
                for v in col {
                    data.extend_from_slice(&v.to_le_bytes());
                }
            }
            start += points * role.width() as u64;
        }
        Self {
            role,
            offsets,
            data: SeriesBytes::Owned(data),
        }
    }

    pub fn role(&self) -> VectorRole {
        self.role
    }

    pub(crate) fn data_bytes(&self) -> &[u8] {
        self.data.bytes()
    }

    pub fn total_values(&self) -> u64 {
        self.data.bytes().len() as u64 / 8
    }

    fn real_at(&self, i: u64) -> f64 {
        let i = i as usize * 8;
        f64::from_le_bytes(self.data.bytes()[i..i + 8].try_into().unwrap())
    }

    pub fn series(&self, row: usize) -> VectorSeries {
        let (start, points) = self.offsets[row];
        let width = self.role.width() as u64;
        let columns = (0..width)
            .map(|c| {
                (0..points)
                    .map(|p| self.real_at(start + c * points + p))
                    .collect()
            })
            .collect();
        VectorSeries {
            role: self.role,
            columns,
        }
    }

    /// Offsets strictly increasing and in bounds; first column strictly
    /// increasing within each series; all values finite.
    pub fn verify(&self, rows: usize) -> Result<(), String> {
        if self.offsets.len() != rows {
            return Err(format!("{} series offsets for {rows} rows", self.offsets.len()));
        }
        let width = self.role.width() as u64;
        let mut expected_start = 0u64;
        for (row, &(start, points)) in self.offsets.iter().enumerate() {
            if start != expected_start || points == 0 {
                return Err(format!("series offsets not strictly increasing at row {row}"));
            }
            expected_start = start + points * width;
            if expected_start > self.total_values() {
                return Err(format!("series for row {row} runs past end of data"));
            }
            let s = self.series(row);
            if s.columns.iter().flatten().any(|v| !v.is_finite()) {
                return Err(format!("non-finite series value at row {row}"));
            }
            if s.columns[0].windows(2).any(|w| w[0] >= w[1]) {
                return Err(format!("series first column not increasing at row {row}"));
            }
        }
        if expected_start != self.total_values() {
            return Err("series data has trailing values".into());
        }
        Ok(())
    }
}

/// One object's series, column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorSeries {
    pub role: VectorRole,
    pub columns: Vec<Vec<f64>>,
}

impl VectorSeries {
    pub fn column_names(&self) -> &'static [&'static str] {
        self.role.columns()
    }

    pub fn points(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn point(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        self.columns.iter().map(move |c| c[i])
    }
}

/// A fetched row: object id plus `(property, value)` in projection order.
#[derive(Debug, Clone, PartialEq)]
pub struct FetchedRow {
    pub id: String,
    pub values: Vec<(String, Scalar)>,
}

/// One dataset of a catalog: schema, object ids, columns and optional
/// vector series. Immutable once built.
#[derive(Debug)]
pub struct Dataset {
    id: String,
    schema: Vec<PropertyDef>,
    ids: Vec<String>,
    rows_by_id: HashMap<String, usize>,
    columns: Vec<Column>,
    vectors: Option<VectorStore>,
}

impl Dataset {
    /// Assembles a dataset; column order follows `schema`. Fails when
    /// lengths disagree, tags mismatch the schema, or ids repeat.
    pub fn new(
        id: impl Into<String>,
        schema: Vec<PropertyDef>,
        ids: Vec<String>,
        columns: Vec<Column>,
        vectors: Option<VectorStore>,
    ) -> Result<Self, CatalogError> {
        let id = id.into();
        if columns.len() != schema.len() {
            return Err(CatalogError::Corrupt(format!(
                "dataset {id}: {} columns for {} properties",
                columns.len(),
                schema.len()
            )));
        }
        for (c, p) in columns.iter().zip(&schema) {
            if c.datatype() != p.datatype {
                return Err(CatalogError::Corrupt(format!(
                    "dataset {id}: column {} is {} but schema says {}",
                    p.name,
                    c.datatype(),
                    p.datatype
                )));
            }
            if c.len() != ids.len() {
                return Err(CatalogError::Corrupt(format!(
                    "dataset {id}: column {} has {} values for {} rows",
                    p.name,
                    c.len(),
                    ids.len()
                )));
            }
        }
        if let Some(v) = &vectors {
            if v.offsets.len() != ids.len() {
                return Err(CatalogError::Corrupt(format!(
                    "dataset {id}: {} series for {} rows",
                    v.offsets.len(),
                    ids.len()
                )));
            }
        }
        let mut rows_by_id = HashMap::with_capacity(ids.len());
        for (row, oid) in ids.iter().enumerate() {
            if rows_by_id.insert(oid.clone(), row).is_some() {
                return Err(CatalogError::Corrupt(format!("dataset {id}: duplicate id {oid:?}")));
            }
        }
        Ok(Self {
            id,
            schema,
            ids,
            rows_by_id,
            columns,
            vectors,
        })
    }

    /// Builds columns and indexes from raw values.
    pub fn from_values(
        id: impl Into<String>,
        schema: Vec<PropertyDef>,
        ids: Vec<String>,
        values: Vec<ColumnValues>,
        vectors: Option<VectorStore>,
    ) -> Result<Self, CatalogError> {
        let columns = values.into_iter().map(Column::build).collect();
        Self::new(id, schema, ids, columns, vectors)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn schema(&self) -> &[PropertyDef] {
        &self.schema
    }

    pub fn row_count(&self) -> usize {
        self.ids.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, index: usize) -> &Column {
        &self.columns[index]
    }

    pub fn vector_role(&self) -> VectorRole {
        self.vectors.as_ref().map_or(VectorRole::None, |v| v.role)
    }

    pub fn vectors(&self) -> Option<&VectorStore> {
        self.vectors.as_ref()
    }

    pub fn row_of(&self, object_id: &str) -> Option<usize> {
        self.rows_by_id.get(object_id).copied()
    }

    pub fn id_of(&self, row: usize) -> &str {
        &self.ids[row]
    }

    pub fn value(&self, row: usize, column: usize) -> Scalar {
        self.columns[column].value(row)
    }

    /// All values of a row, schema order.
    pub fn row(&self, row: usize) -> Vec<Scalar> {
        self.columns.iter().map(|c| c.value(row)).collect()
    }

    pub fn property_index(&self, name: &str) -> Result<usize, CatalogError> {
        self.schema
            .iter()
            .position(|p| p.name == name)
            .ok_or_else(|| CatalogError::UnknownProperty(name.to_owned()))
    }

    /// Column positions for a projection; `None` selects every property.
    pub fn projection(&self, fields: Option<&[String]>) -> Result<Vec<usize>, CatalogError> {
        match fields {
            None => Ok((0..self.schema.len()).collect()),
            Some(fields) => fields.iter().map(|f| self.property_index(f)).collect(),
        }
    }

    /// Rows with `low <= value <= high` on a numeric property, ascending.
    /// Infinite bounds are allowed.
    pub fn range_query(&self, property: &str, low: f64, high: f64) -> Result<Vec<usize>, CatalogError> {
        let col = self.property_index(property)?;
        if low.is_nan() || high.is_nan() || low > high {
            return Err(CatalogError::InvalidRange { low, high });
        }
        let mut rows: Vec<usize> = match &self.columns[col] {
            Column::Real { index, .. } => index
                .range(Bound::Included(low), Bound::Included(high))
                .iter()
                .map(|e| e.1 as usize)
                .collect(),
            Column::Integer { index, .. } => match integer_bounds(low, high) {
                Some((lo, hi)) => index
                    .range(Bound::Included(lo), Bound::Included(hi))
                    .iter()
                    .map(|e| e.1 as usize)
                    .collect(),
                None => Vec::new(),
            },
            Column::Text { .. } => return Err(CatalogError::NotNumeric(property.to_owned())),
        };
        rows.sort_unstable();
        Ok(rows)
    }

    pub fn fetch_rows(
        &self,
        rows: &[usize],
        fields: Option<&[String]>,
    ) -> Result<Vec<FetchedRow>, CatalogError> {
        let cols = self.projection(fields)?;
        rows.iter()
            .map(|&row| {
                if row >= self.row_count() {
                    return Err(CatalogError::RowOutOfRange {
                        row,
                        rows: self.row_count(),
                    });
                }
                Ok(FetchedRow {
                    id: self.ids[row].clone(),
                    values: cols
                        .iter()
                        .map(|&c| (self.schema[c].name.clone(), self.value(row, c)))
                        .collect(),
                })
            })
            .collect()
    }

    pub fn fetch_vector(&self, object_id: &str) -> Result<VectorSeries, CatalogError> {
        let store = self
            .vectors
            .as_ref()
            .ok_or_else(|| CatalogError::NoVectorData(self.id.clone()))?;
        let row = self
            .row_of(object_id)
            .ok_or_else(|| CatalogError::UnknownObject(object_id.to_owned()))?;
        Ok(store.series(row))
    }

    /// Full consistency check of every column and the vector store.
    pub fn verify(&self) -> Result<(), CatalogError> {
        for (c, p) in self.columns.iter().zip(&self.schema) {
            c.verify()
                .map_err(|e| CatalogError::Corrupt(format!("{}/{}: {e}", self.id, p.name)))?;
        }
        if let Some(v) = &self.vectors {
            v.verify(self.row_count())
                .map_err(|e| CatalogError::Corrupt(format!("{}/vectors: {e}", self.id)))?;
        }
        Ok(())
    }
}

/// Integer interval equivalent to the real interval `[low, high]`.
fn integer_bounds(low: f64, high: f64) -> Option<(i64, i64)> {
    const TWO_63: f64 = 9_223_372_036_854_775_808.0;
    let lo = low.ceil();
    let hi = high.floor();
    if lo > hi || lo >= TWO_63 || hi < -TWO_63 {
        return None;
    }
    let lo = if lo <= -TWO_63 { i64::MIN } else { lo as i64 };
    let hi = if hi >= TWO_63 { i64::MAX } else { hi as i64 };
    Some((lo, hi))
}
