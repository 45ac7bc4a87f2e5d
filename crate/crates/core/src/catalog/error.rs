use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Failures while building a catalog. Nothing is left on disk when one of
/// these is returned.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("CsvFormatError: {file}:{line}: {detail}")]
    CsvFormat {
        file: PathBuf,
        line: u64,
        detail: String,
    },
    #[error("ValueError: {file}:{line}: non-finite value in column {column:?}")]
    NonFinite {
        file: PathBuf,
        line: u64,
        column: String,
    },
    #[error("ValueError: {file}:{line}: column {column:?} expects {expected}, found {found:?}")]
    TypeMismatch {
        file: PathBuf,
        line: u64,
        column: String,
        expected: &'static str,
        found: String,
    },
    #[error("ValueError: {file}:{line}: {detail}")]
    BadValue {
        file: PathBuf,
        line: u64,
        detail: String,
    },
    #[error("DuplicateId: {file}:{line}: object id {id:?} already used")]
    DuplicateId { file: PathBuf, line: u64, id: String },
    #[error("DanglingPair: {file}:{line}: {side} id {id:?} not in dataset {dataset:?}")]
    DanglingPair {
        file: PathBuf,
        line: u64,
        side: &'static str,
        id: String,
        dataset: String,
    },
    #[error("ReservedPropertyName: {file}: property name {name:?} is reserved")]
    ReservedPropertyName { file: PathBuf, name: String },
    #[error("SpecError: {0}")]
    Spec(String),
    #[error("OutputNotEmpty: {0} exists and is not empty")]
    OutputNotEmpty(PathBuf),
    #[error("IoError: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl IngestError {
    /// Stable error class name.
    pub fn code(&self) -> &'static str {
        match self {
            IngestError::CsvFormat { .. } => "CsvFormatError",
            IngestError::NonFinite { .. }
            | IngestError::TypeMismatch { .. }
            | IngestError::BadValue { .. } => "ValueError",
            IngestError::DuplicateId { .. } => "DuplicateId",
            IngestError::DanglingPair { .. } => "DanglingPair",
            IngestError::ReservedPropertyName { .. } => "ReservedPropertyName",
            IngestError::Spec(_) => "SpecError",
            IngestError::OutputNotEmpty(_) => "OutputNotEmpty",
            IngestError::Io { .. } => "IoError",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        IngestError::Io {
            path: path.into(),
            source,
        }
    }
}

/// Failures opening or reading an existing catalog.
#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("FormatVersionMismatch: catalog format {found}, expected {expected}")]
    FormatVersionMismatch { found: String, expected: u32 },
    #[error("CorruptCatalog: {0}")]
    Corrupt(String),
    #[error("IoError: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("unknown dataset {0:?}")]
    UnknownDataset(String),
    #[error("unknown property {0:?}")]
    UnknownProperty(String),
    #[error("property {0:?} is not numeric")]
    NotNumeric(String),
    #[error("invalid range [{low}, {high}]")]
    InvalidRange { low: f64, high: f64 },
    #[error("row {row} out of range for {rows} rows")]
    RowOutOfRange { row: usize, rows: usize },
    #[error("unknown object {0:?}")]
    UnknownObject(String),
    #[error("dataset {0:?} has no vector data")]
    NoVectorData(String),
    #[error("unknown relationship {0:?}")]
    UnknownRelationship(String),
}

impl CatalogError {
    pub fn code(&self) -> &'static str {
        match self {
            CatalogError::FormatVersionMismatch { .. } => "FormatVersionMismatch",
            CatalogError::Corrupt(_) => "CorruptCatalog",
            CatalogError::Io { .. } => "IoError",
            CatalogError::UnknownDataset(_) => "UnknownDataset",
            CatalogError::UnknownProperty(_) => "UnknownProperty",
            CatalogError::NotNumeric(_) => "NotNumeric",
            CatalogError::InvalidRange { .. } => "InvalidRange",
            CatalogError::RowOutOfRange { .. } => "RowOutOfRange",
            CatalogError::UnknownObject(_) => "UnknownObject",
            CatalogError::NoVectorData(_) => "NoVectorData",
            CatalogError::UnknownRelationship(_) => "UnknownRelationship",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CatalogError::Io {
            path: path.into(),
            source,
        }
    }
}
