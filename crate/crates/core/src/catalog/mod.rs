//! The immutable on-disk catalog.
//!
//! ```text
//! manifest.json                      format version, datasets, row counts, relationships
//! simdm.json                         canonical SimDM graph
//! datasets/<id>/schema.csv           name,datatype,unit,description
//! datasets/<id>/ids.txt              one object id per line, row order
//! datasets/<id>/columns/<prop>.val   8-byte LE values, row order
//! datasets/<id>/columns/<prop>.idx   8-byte LE (value, row) pairs sorted by value, row
//! datasets/<id>/strings/<prop>.dict  sorted unique strings, one per line
//! datasets/<id>/strings/<prop>.code  8-byte LE dictionary codes, row order
//! datasets/<id>/vectors/series.dat   column-major per-object blocks of 8-byte LE reals
//! datasets/<id>/vectors/series.off   8-byte LE (start, points) per object, row order
//! relationships/<name>.pairs         CSV source_id,target_id
//! ```

mod column;
mod dataset;
mod error;
pub mod format;
mod ingest;
mod spec;
mod store;

pub use column::{Column, ColumnValues, IndexValue, SortedIndex};
pub use dataset::{Dataset, FetchedRow, VectorRole, VectorSeries, VectorStore};
pub use error::{CatalogError, IngestError};
pub use ingest::{ingest, IngestSummary};
pub use spec::{DatasetSpec, ExperimentSpec, IngestSpec, ProtocolSpec, RelationshipSpec};
pub use store::Catalog;
