//! File layout and little-endian encodings of the on-disk catalog.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::dataset::VectorRole;
use crate::scalar::Datatype;
use crate::simdm::PropertyDef;

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST: &str = "manifest.json";
pub const SIMDM: &str = "simdm.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format_version: serde_json::Value,
    pub datasets: Vec<ManifestDataset>,
    pub relationships: Vec<ManifestRelationship>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestDataset {
    pub id: String,
    pub row_count: u64,
    pub vector_role: VectorRole,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestRelationship {
    pub name: String,
    pub source_dataset: String,
    pub target_dataset: String,
    pub pair_count: u64,
}

pub fn dataset_dir(root: &Path, id: &str) -> PathBuf {
    root.join("datasets").join(id)
}

pub fn dataset_ref(id: &str) -> String {
    format!("datasets/{id}")
}

pub fn pairs_ref(name: &str) -> String {
    format!("relationships/{name}.pairs")
}

pub fn schema_path(ds: &Path) -> PathBuf {
    ds.join("schema.csv")
}

pub fn ids_path(ds: &Path) -> PathBuf {
    ds.join("ids.txt")
}

pub fn values_path(ds: &Path, prop: &str) -> PathBuf {
    ds.join("columns").join(format!("{prop}.val"))
}

pub fn index_path(ds: &Path, prop: &str) -> PathBuf {
    ds.join("columns").join(format!("{prop}.idx"))
}

pub fn dict_path(ds: &Path, prop: &str) -> PathBuf {
    ds.join("strings").join(format!("{prop}.dict"))
}

pub fn codes_path(ds: &Path, prop: &str) -> PathBuf {
    ds.join("strings").join(format!("{prop}.code"))
}

pub fn series_data_path(ds: &Path) -> PathBuf {
    ds.join("vectors").join("series.dat")
}

pub fn series_offsets_path(ds: &Path) -> PathBuf {
    ds.join("vectors").join("series.off")
}

/// Writes 8-byte little-endian words.
pub fn write_words<I: IntoIterator<Item = [u8; 8]>>(path: &Path, words: I) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut w = BufWriter::with_capacity(1 << 16, fs::File::create(path)?);
    for word in words {
        w.write_all(&word)?;
    }
    w.into_inner().map_err(|e| e.into_error())?.sync_all()
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, bytes)
}

/// Splits a byte buffer into 8-byte words; `None` when the length is not a
/// multiple of 8.
pub fn words(bytes: &[u8]) -> Option<impl Iterator<Item = [u8; 8]> + '_> {
    bytes.len().is_multiple_of(8).then(|| bytes.chunks_exact(8).map(|c| c.try_into().unwrap()))
}

/// Schema file: header then `name,datatype,unit,description` per property.
pub fn render_schema(props: &[PropertyDef]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(["name", "datatype", "unit", "description"]).unwrap();
    for p in props {
        w.write_record([p.name.as_str(), p.datatype.as_str(), &p.unit, &p.description])
            .unwrap();
    }
    w.into_inner().unwrap()
}

pub fn parse_schema_record(record: &csv::StringRecord) -> Result<PropertyDef, String> {
    if record.len() != 4 {
        return Err(format!("expected 4 fields, found {}", record.len()));
    }
    let datatype = Datatype::parse(&record[1])
        .ok_or_else(|| format!("unknown datatype {:?} (real, integer, text)", &record[1]))?;
    Ok(PropertyDef {
        name: record[0].to_owned(),
        datatype,
        unit: record[2].to_owned(),
        description: record[3].to_owned(),
    })
}
