use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use super::column::{Column, SortedIndex};
use super::dataset::{Dataset, SeriesBytes, VectorRole, VectorStore};
use super::error::CatalogError;
use super::format::{self, Manifest, FORMAT_VERSION};
use crate::simdm::{InstanceGraph, PropertyDef, Relationship, RelationshipSource};
use crate::vo::parse_simdm;

#[derive(Debug)]
struct PairTable {
    pairs: Vec<(String, String)>,
    by_source: HashMap<String, Vec<usize>>,
}

/// A read-only handle on an ingested catalog. Safe to share across threads.
#[derive(Debug)]
pub struct Catalog {
    root: PathBuf,
    graph: InstanceGraph,
    datasets: Vec<Dataset>,
    pairs: HashMap<String, PairTable>,
}

fn corrupt(msg: impl Into<String>) -> CatalogError {
    CatalogError::Corrupt(msg.into())
}

fn read(path: &Path) -> Result<Vec<u8>, CatalogError> {
    fs::read(path).map_err(|e| CatalogError::io(path, e))
}

/// Reads a file of 8-byte words, which must hold exactly `expected` words.
fn read_words(path: &Path, expected: u64) -> Result<Vec<[u8; 8]>, CatalogError> {
    let bytes = read(path)?;
    if bytes.len() as u64 != expected * 8 {
        return Err(corrupt(format!(
            "{}: {} bytes, expected {}",
            path.display(),
            bytes.len(),
            expected * 8
        )));
    }
    Ok(format::words(&bytes).expect("length checked").collect())
}

impl Catalog {
    /// Opens a catalog with cheap consistency checks (versions, file
    /// lengths, id uniqueness, pair references).
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, CatalogError> {
        Self::open_with(dir.as_ref(), false)
    }

    /// Opens and additionally verifies every index permutation, dictionary
    /// and vector series.
    pub fn open_verified(dir: impl AsRef<Path>) -> Result<Self, CatalogError> {
        Self::open_with(dir.as_ref(), true)
    }

    pub fn open_with(dir: &Path, verify: bool) -> Result<Self, CatalogError> {
        let manifest_bytes = read(&dir.join(format::MANIFEST))?;
        let manifest: Manifest = serde_json::from_slice(&manifest_bytes)
            .map_err(|e| corrupt(format!("manifest: {e}")))?;
        if manifest.format_version != FORMAT_VERSION {
            return Err(CatalogError::FormatVersionMismatch {
                found: manifest.format_version.to_string(),
                expected: FORMAT_VERSION,
            });
        }

        let graph = parse_simdm(&read(&dir.join(format::SIMDM))?)
            .map_err(|e| corrupt(format!("simdm.json: {e}")))?;

        let manifest_ids: Vec<&str> = manifest.datasets.iter().map(|d| d.id.as_str()).collect();
        let graph_ids: Vec<&str> = graph.datasets.iter().map(|d| d.id.as_str()).collect();
        if manifest_ids != graph_ids {
            return Err(corrupt("manifest and simdm.json list different datasets"));
        }

        let mut datasets = Vec::with_capacity(manifest.datasets.len());
        for (m, g) in manifest.datasets.iter().zip(&graph.datasets) {
            if m.row_count != g.object_count {
                return Err(corrupt(format!(
                    "dataset {}: manifest has {} rows, graph has {}",
                    m.id, m.row_count, g.object_count
                )));
            }
            let props = &graph
                .object_type(&g.object_type_id)
                .expect("validated graph")
                .properties;
            datasets.push(load_dataset(dir, &m.id, m.row_count, m.vector_role, props)?);
        }

        let mut pairs = HashMap::new();
        let manifest_rels: Vec<&str> = manifest.relationships.iter().map(|r| r.name.as_str()).collect();
        let graph_rels: Vec<&str> = graph.relationships.iter().map(|r| r.name.as_str()).collect();
        if manifest_rels != graph_rels {
            return Err(corrupt("manifest and simdm.json list different relationships"));
        }
        for (m, rel) in manifest.relationships.iter().zip(&graph.relationships) {
            let table = load_pairs(dir, rel, &datasets)?;
            if table.pairs.len() as u64 != m.pair_count {
                return Err(corrupt(format!(
                    "relationship {}: {} pairs, manifest says {}",
                    rel.name,
                    table.pairs.len(),
                    m.pair_count
                )));
            }
            pairs.insert(rel.name.clone(), table);
        }

        if verify {
            for d in &datasets {
                d.verify()?;
            }
        }

        Ok(Self {
            root: dir.to_owned(),
            graph,
            datasets,
            pairs,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn graph(&self) -> &InstanceGraph {
        &self.graph
    }

    pub fn datasets(&self) -> &[Dataset] {
        &self.datasets
    }

    pub fn dataset(&self, id: &str) -> Result<&Dataset, CatalogError> {
        self.datasets
            .iter()
            .find(|d| d.id() == id)
            .ok_or_else(|| CatalogError::UnknownDataset(id.to_owned()))
    }

    /// Pair table of a relationship, in file order.
    pub fn relationship_pairs(&self, name: &str) -> Result<&[(String, String)], CatalogError> {
        self.pairs
            .get(name)
            .map(|t| t.pairs.as_slice())
            .ok_or_else(|| CatalogError::UnknownRelationship(name.to_owned()))
    }

    /// Runs the full verification on an already-open catalog.
    pub fn verify(&self) -> Result<(), CatalogError> {
        self.datasets.iter().try_for_each(Dataset::verify)
    }
}

impl RelationshipSource for Catalog {
    fn relationship(&self, name: &str) -> Option<&Relationship> {
        self.graph.relationship(name)
    }

    fn pairs(&self, name: &str) -> Option<&[(String, String)]> {
        self.relationship_pairs(name).ok()
    }

    fn has_object(&self, dataset_id: &str, object_id: &str) -> bool {
        self.dataset(dataset_id)
            .is_ok_and(|d| d.row_of(object_id).is_some())
    }

    fn targets_of(&self, name: &str, source: &str) -> Vec<String> {
        let Some(table) = self.pairs.get(name) else {
            return Vec::new();
        };
        table
            .by_source
            .get(source)
            .map(|idx| idx.iter().map(|&i| table.pairs[i].1.clone()).collect())
            .unwrap_or_default()
    }
}

fn load_dataset(
    root: &Path,
    id: &str,
    rows: u64,
    role: VectorRole,
    props: &[PropertyDef],
) -> Result<Dataset, CatalogError> {
    let dir = format::dataset_dir(root, id);

    let schema_path = format::schema_path(&dir);
    let bytes = read(&schema_path)?;
    let mut reader = csv::ReaderBuilder::new().from_reader(bytes.as_slice());
    let mut schema = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| corrupt(format!("{}: {e}", schema_path.display())))?;
        schema.push(
            format::parse_schema_record(&rec)
                .map_err(|e| corrupt(format!("{}: {e}", schema_path.display())))?,
        );
    }
    if schema != props {
        return Err(corrupt(format!("dataset {id}: schema.csv disagrees with simdm.json")));
    }

    let ids_path = format::ids_path(&dir);
    let ids_text = String::from_utf8(read(&ids_path)?)
        .map_err(|_| corrupt(format!("{}: not UTF-8", ids_path.display())))?;
    let ids: Vec<String> = ids_text.split_terminator('\n').map(str::to_owned).collect();
    if ids.len() as u64 != rows || (rows > 0 && !ids_text.ends_with('\n')) {
        return Err(corrupt(format!("{}: expected {rows} ids", ids_path.display())));
    }

    let mut columns = Vec::with_capacity(schema.len());
    for p in &schema {
        columns.push(load_column(&dir, p, rows)?);
    }

    let vectors = match role {
        VectorRole::None => None,
        role => Some(load_vectors(&dir, role, rows)?),
    };

    Dataset::new(id, schema, ids, columns, vectors)
}

fn load_column(dir: &Path, p: &PropertyDef, rows: u64) -> Result<Column, CatalogError> {
    use crate::scalar::Datatype;
    let name = &p.name;
    Ok(match p.datatype {
        Datatype::Real => {
            let values = read_words(&format::values_path(dir, name), rows)?
                .into_iter()
                .map(f64::from_le_bytes)
                .collect();
            let raw = read_words(&format::index_path(dir, name), rows * 2)?;
            let entries = raw
                .chunks_exact(2)
                .map(|c| (f64::from_le_bytes(c[0]), u64::from_le_bytes(c[1])))
                .collect();
            Column::Real {
                values,
                index: SortedIndex::from_entries(entries),
            }
        }
        Datatype::Integer => {
            let values = read_words(&format::values_path(dir, name), rows)?
                .into_iter()
                .map(i64::from_le_bytes)
                .collect();
            let raw = read_words(&format::index_path(dir, name), rows * 2)?;
            let entries = raw
                .chunks_exact(2)
                .map(|c| (i64::from_le_bytes(c[0]), u64::from_le_bytes(c[1])))
                .collect();
            Column::Integer {
                values,
                index: SortedIndex::from_entries(entries),
            }
        }
        Datatype::Text => {
            let dict_path = format::dict_path(dir, name);
            let text = String::from_utf8(read(&dict_path)?)
                .map_err(|_| corrupt(format!("{}: not UTF-8", dict_path.display())))?;
            let dict: Vec<String> = text.split_terminator('\n').map(str::to_owned).collect();
            let codes: Vec<u64> = read_words(&format::codes_path(dir, name), rows)?
                .into_iter()
                .map(u64::from_le_bytes)
                .collect();
            if let Some(row) = codes.iter().position(|&c| c >= dict.len() as u64) {
                return Err(corrupt(format!("{}: code out of range at row {row}", dict_path.display())));
            }
            Column::Text { dict, codes }
        }
    })
}

fn load_vectors(dir: &Path, role: VectorRole, rows: u64) -> Result<VectorStore, CatalogError> {
    let off_path = format::series_offsets_path(dir);
    let offsets: Vec<(u64, u64)> = read_words(&off_path, rows * 2)?
        .chunks_exact(2)
        .map(|c| (u64::from_le_bytes(c[0]), u64::from_le_bytes(c[1])))
        .collect();

    let dat_path = format::series_data_path(dir);
    let file = fs::File::open(&dat_path).map_err(|e| CatalogError::io(&dat_path, e))?;
    let len = file.metadata().map_err(|e| CatalogError::io(&dat_path, e))?.len();
    let data = if len == 0 {
        SeriesBytes::Owned(Vec::new())
    } else {
        // SAFETY: catalogs are immutable once written; the map is read-only.
        let map = unsafe { memmap2::Mmap::map(&file) }.map_err(|e| CatalogError::io(&dat_path, e))?;
        SeriesBytes::Mapped(map)
    };

    let width = role.width() as u64;
    let needed = offsets.iter().map(|&(s, n)| s + n * width).max().unwrap_or(0);
    if len % 8 != 0 || needed * 8 > len {
        return Err(corrupt(format!(
            "{}: {len} bytes, offsets need {}",
            dat_path.display(),
            needed * 8
        )));
    }
    Ok(VectorStore {
        role,
        offsets,
        data,
    })
}

fn load_pairs(root: &Path, rel: &Relationship, datasets: &[Dataset]) -> Result<PairTable, CatalogError> {
    let path = root.join(format::pairs_ref(&rel.name));
    let find = |id: &str| {
        datasets
            .iter()
            .find(|d| d.id() == id)
            .ok_or_else(|| corrupt(format!("relationship {}: unknown dataset {id}", rel.name)))
    };
    let source = find(&rel.source_dataset_id)?;
    let target = find(&rel.target_dataset_id)?;

    let bytes = read(&path)?;
    let mut reader = csv::ReaderBuilder::new().from_reader(bytes.as_slice());
    let mut pairs = Vec::new();
    let mut by_source: HashMap<String, Vec<usize>> = HashMap::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| corrupt(format!("{}: {e}", path.display())))?;
        if rec.len() != 2 || source.row_of(&rec[0]).is_none() || target.row_of(&rec[1]).is_none() {
            return Err(corrupt(format!("{}: dangling pair {:?}", path.display(), rec)));
        }
        by_source.entry(rec[0].to_owned()).or_default().push(pairs.len());
        pairs.push((rec[0].to_owned(), rec[1].to_owned()));
    }
    Ok(PairTable { pairs, by_source })
}
