//! CSV ingestion into a fresh catalog directory.
//!
//! Every input file is read and checked before anything is written, and a
//! failure while writing removes what was written, so a catalog directory
//! either holds a complete catalog with its manifest or nothing.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use super::column::{Column, ColumnValues};
use super::dataset::{VectorRole, VectorStore};
use super::error::IngestError;
use super::format::{self, Manifest, ManifestDataset, ManifestRelationship, FORMAT_VERSION};
use super::spec::{DatasetSpec, IngestSpec, RelationshipSpec};
use crate::scalar::{is_identifier, is_reserved_word, Datatype, Scalar};
use crate::simdm::{
    validate_graph, Experiment, InstanceGraph, ObjectType, OutputDataset, PropertyDef, Protocol,
    Relationship,
};
use crate::vo::render_simdm;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestSummary {
    pub datasets: Vec<(String, u64)>,
    pub relationships: Vec<(String, u64)>,
}

impl fmt::Display for IngestSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (id, rows) in &self.datasets {
            writeln!(f, "{id}: {rows} rows")?;
        }
        for (name, pairs) in &self.relationships {
            writeln!(f, "{name}: {pairs} pairs")?;
        }
        Ok(())
    }
}

struct LoadedDataset {
    spec: DatasetSpec,
    schema: Vec<PropertyDef>,
    ids: Vec<String>,
    columns: Vec<Column>,
    vectors: Option<VectorStore>,
}

struct LoadedRelationship {
    spec: RelationshipSpec,
    pairs: Vec<(String, String)>,
}

/// Reads, validates and writes a complete catalog under `output_dir`.
pub fn ingest(spec: &IngestSpec, output_dir: &Path) -> Result<IngestSummary, IngestError> {
    spec.check()?;
    let existed = match fs::read_dir(output_dir) {
        Ok(mut entries) => {
            if entries.next().is_some() {
                return Err(IngestError::OutputNotEmpty(output_dir.to_owned()));
            }
            true
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => false,
        Err(e) => return Err(IngestError::io(output_dir, e)),
    };

    let mut datasets = Vec::with_capacity(spec.datasets.len());
    for d in &spec.datasets {
        datasets.push(load_dataset(d)?);
    }
    let mut relationships = Vec::with_capacity(spec.relationships.len());
    for r in &spec.relationships {
        relationships.push(load_relationship(r, &datasets)?);
    }

    let graph = build_graph(spec, &datasets);
    let report = validate_graph(&graph);
    if !report.is_valid() {
        return Err(IngestError::Spec(format!("metadata graph is invalid:\n{report}")));
    }

    let result = write_catalog(output_dir, &graph, &datasets, &relationships);
    if let Err(e) = result {
        cleanup(output_dir, existed);
        return Err(e);
    }

    Ok(IngestSummary {
        datasets: datasets
            .iter()
            .map(|d| (d.spec.id.clone(), d.ids.len() as u64))
            .collect(),
        relationships: relationships
            .iter()
            .map(|r| (r.spec.name.clone(), r.pairs.len() as u64))
            .collect(),
    })
}

fn cleanup(dir: &Path, existed: bool) {
    if existed {
        if let Ok(entries) = fs::read_dir(dir) {
            for e in entries.flatten() {
                let p = e.path();
                let _ = if p.is_dir() { fs::remove_dir_all(&p) } else { fs::remove_file(&p) };
            }
        }
    } else {
        let _ = fs::remove_dir_all(dir);
    }
}

fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>, IngestError> {
    let file = fs::File::open(path).map_err(|e| IngestError::io(path, e))?;
    Ok(csv::ReaderBuilder::new().has_headers(true).from_reader(file))
}

fn csv_error(path: &Path, e: csv::Error) -> IngestError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => IngestError::io(path, io),
        kind => IngestError::CsvFormat {
            file: path.to_owned(),
            line,
            detail: match kind {
                csv::ErrorKind::UnequalLengths {
                    expected_len, len, ..
                } => format!("expected {expected_len} fields, found {len}"),
                csv::ErrorKind::Utf8 { err, .. } => format!("invalid UTF-8: {err}"),
                other => format!("{other:?}"),
            },
        },
    }
}

fn header(path: &Path, reader: &mut csv::Reader<fs::File>) -> Result<Vec<String>, IngestError> {
    let h = reader.headers().map_err(|e| csv_error(path, e))?;
    if h.is_empty() || (h.len() == 1 && h[0].is_empty()) {
        return Err(IngestError::CsvFormat {
            file: path.to_owned(),
            line: 1,
            detail: "missing header line".into(),
        });
    }
    Ok(h.iter().map(str::to_owned).collect())
}

fn read_schema(path: &Path) -> Result<Vec<PropertyDef>, IngestError> {
    let mut reader = csv_reader(path)?;
    let h = header(path, &mut reader)?;
    if h != ["name", "datatype", "unit", "description"] {
        return Err(IngestError::CsvFormat {
            file: path.to_owned(),
            line: 1,
            detail: "schema header must be name,datatype,unit,description".into(),
        });
    }
    let mut props: Vec<PropertyDef> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |detail: String| IngestError::CsvFormat {
            file: path.to_owned(),
            line,
            detail,
        };
        let def = format::parse_schema_record(&rec).map_err(bad)?;
        if def.name == "id" || is_reserved_word(&def.name) {
            return Err(IngestError::ReservedPropertyName {
                file: path.to_owned(),
                name: def.name,
            });
        }
        if !is_identifier(&def.name) {
            return Err(bad(format!("property name {:?} is not an identifier", def.name)));
        }
        if props.iter().any(|p| p.name == def.name) {
            return Err(bad(format!("property {:?} declared twice", def.name)));
        }
        props.push(def);
    }
    if props.is_empty() {
        return Err(IngestError::CsvFormat {
            file: path.to_owned(),
            line: 1,
            detail: "schema declares no properties".into(),
        });
    }
    Ok(props)
}

fn check_object_id(path: &Path, line: u64, id: &str) -> Result<(), IngestError> {
    if id.is_empty() || id.chars().any(char::is_control) {
        return Err(IngestError::BadValue {
            file: path.to_owned(),
            line,
            detail: format!("object id {id:?} must be non-empty without control characters"),
        });
    }
    Ok(())
}

fn parse_real(path: &Path, line: u64, column: &str, field: &str) -> Result<f64, IngestError> {
    if field.is_empty() {
        return Err(IngestError::BadValue {
            file: path.to_owned(),
            line,
            detail: format!("missing value in column {column:?}"),
        });
    }
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(IngestError::NonFinite {
            file: path.to_owned(),
            line,
            column: column.to_owned(),
        }),
        Err(_) => Err(IngestError::TypeMismatch {
            file: path.to_owned(),
            line,
            column: column.to_owned(),
            expected: "real",
            found: field.to_owned(),
        }),
    }
}

fn parse_field(path: &Path, line: u64, def: &PropertyDef, field: &str) -> Result<Scalar, IngestError> {
    match def.datatype {
        Datatype::Real => parse_real(path, line, &def.name, field).map(Scalar::Real),
        Datatype::Integer => {
            if field.is_empty() {
                return Err(IngestError::BadValue {
                    file: path.to_owned(),
                    line,
                    detail: format!("missing value in column {:?}", def.name),
                });
            }
            field
                .parse::<i64>()
                .map(Scalar::Integer)
                .map_err(|_| IngestError::TypeMismatch {
                    file: path.to_owned(),
                    line,
                    column: def.name.clone(),
                    expected: "integer",
                    found: field.to_owned(),
                })
        }
        Datatype::Text => {
            if field.contains(['\n', '\r']) {
                return Err(IngestError::BadValue {
                    file: path.to_owned(),
                    line,
                    detail: format!("line break in text column {:?}", def.name),
                });
            }
            Ok(Scalar::Text(field.to_owned()))
        }
    }
}

fn load_dataset(spec: &DatasetSpec) -> Result<LoadedDataset, IngestError> {
    let schema = read_schema(&spec.schema_csv)?;
    let path = spec.scalar_csv.as_path();
    let mut reader = csv_reader(path)?;
    let h = header(path, &mut reader)?;
    let header_error = |detail: String| IngestError::CsvFormat {
        file: path.to_owned(),
        line: 1,
        detail,
    };
    if h[0] != "id" {
        return Err(header_error("first column must be \"id\"".into()));
    }
    // position of each schema property within a record
    let mut field_of = Vec::with_capacity(schema.len());
    for p in &schema {
        let hits: Vec<usize> = (1..h.len()).filter(|&i| h[i] == p.name).collect();
        match hits.as_slice() {
            [i] => field_of.push(*i),
            [] => return Err(header_error(format!("missing column {:?}", p.name))),
            _ => return Err(header_error(format!("column {:?} repeated", p.name))),
        }
    }
    if h.len() != schema.len() + 1 {
        let extra: Vec<&str> = h[1..]
            .iter()
            .filter(|c| !schema.iter().any(|p| &p.name == *c))
            .map(String::as_str)
            .collect();
        return Err(header_error(format!("columns not in schema: {extra:?}")));
    }

    let mut ids = Vec::new();
    let mut seen = HashSet::new();
    let mut values: Vec<ColumnValues> = schema.iter().map(|p| ColumnValues::empty(p.datatype)).collect();
    let mut record = csv::StringRecord::new();
    loop {
        match reader.read_record(&mut record) {
            Ok(true) => {}
            Ok(false) => break,
            Err(e) => return Err(csv_error(path, e)),
        }
        let line = record.position().map_or(0, |p| p.line());
        let id = &record[0];
        check_object_id(path, line, id)?;
        if !seen.insert(id.to_owned()) {
            return Err(IngestError::DuplicateId {
                file: path.to_owned(),
                line,
                id: id.to_owned(),
            });
        }
        for ((def, &fi), col) in schema.iter().zip(&field_of).zip(&mut values) {
            col.push(parse_field(path, line, def, &record[fi])?);
        }
        ids.push(id.to_owned());
    }

    let vectors = match &spec.vector_csv {
        Some(vpath) => Some(load_vectors(vpath, spec.vector_role, &ids)?),
        None => None,
    };

    Ok(LoadedDataset {
        spec: spec.clone(),
        schema,
        ids,
        columns: values.into_iter().map(Column::build).collect(),
        vectors,
    })
}

/// Rows `id,x,y[,z]`, grouped by id, first value strictly increasing within
/// a group. Every object needs at least one point.
fn load_vectors(path: &Path, role: VectorRole, ids: &[String]) -> Result<VectorStore, IngestError> {
    let width = role.width();
    let row_of: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let mut reader = csv_reader(path)?;
    let h = header(path, &mut reader)?;
    if h.len() != width + 1 || h[0] != "id" {
        return Err(IngestError::CsvFormat {
            file: path.to_owned(),
            line: 1,
            detail: format!("{} vectors need header id plus {width} value columns", role.as_str()),
        });
    }

    let mut series: Vec<Option<Vec<Vec<f64>>>> = vec![None; ids.len()];
    let mut current: Option<usize> = None;
    let mut record = csv::StringRecord::new();
    let mut last_line = 1;
    loop {
        match reader.read_record(&mut record) {
            Ok(true) => {}
            Ok(false) => break,
            Err(e) => return Err(csv_error(path, e)),
        }
        let line = record.position().map_or(0, |p| p.line());
        last_line = line;
        let id = &record[0];
        let row = *row_of.get(id).ok_or_else(|| IngestError::BadValue {
            file: path.to_owned(),
            line,
            detail: format!("vector rows for unknown object {id:?}"),
        })?;
        if current != Some(row) {
            if series[row].is_some() {
                return Err(IngestError::CsvFormat {
                    file: path.to_owned(),
                    line,
                    detail: format!("rows for object {id:?} are not contiguous"),
                });
            }
            series[row] = Some(vec![Vec::new(); width]);
            current = Some(row);
        }
        let cols = series[row].as_mut().unwrap();
        for (c, col) in cols.iter_mut().enumerate() {
            let v = parse_real(path, line, &h[c + 1], &record[c + 1])?;
            if c == 0 && col.last().is_some_and(|&prev| prev >= v) {
                return Err(IngestError::BadValue {
                    file: path.to_owned(),
                    line,
                    detail: format!("{} must be strictly increasing for object {id:?}", h[1]),
                });
            }
            col.push(v);
        }
    }

    let mut complete = Vec::with_capacity(ids.len());
    for (row, s) in series.into_iter().enumerate() {
        complete.push(s.ok_or_else(|| IngestError::BadValue {
            file: path.to_owned(),
            line: last_line,
            detail: format!("object {:?} has no vector rows", ids[row]),
        })?);
    }
    Ok(VectorStore::from_series(role, &complete))
}

fn load_relationship(
    spec: &RelationshipSpec,
    datasets: &[LoadedDataset],
) -> Result<LoadedRelationship, IngestError> {
    let path = spec.pairs_csv.as_path();
    let find = |id: &str| datasets.iter().find(|d| d.spec.id == id).expect("checked by IngestSpec::check");
    let source_ids: HashSet<&str> = find(&spec.source_dataset).ids.iter().map(String::as_str).collect();
    let target_ids: HashSet<&str> = find(&spec.target_dataset).ids.iter().map(String::as_str).collect();

    let mut reader = csv_reader(path)?;
    let h = header(path, &mut reader)?;
    if h.len() != 2 {
        return Err(IngestError::CsvFormat {
            file: path.to_owned(),
            line: 1,
            detail: "pairs need exactly two columns: source_id,target_id".into(),
        });
    }
    let mut pairs = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        for (side, id, ids, ds) in [
            ("source", &rec[0], &source_ids, &spec.source_dataset),
            ("target", &rec[1], &target_ids, &spec.target_dataset),
        ] {
            if !ids.contains(id) {
                return Err(IngestError::DanglingPair {
                    file: path.to_owned(),
                    line,
                    side,
                    id: id.to_owned(),
                    dataset: ds.clone(),
                });
            }
        }
        pairs.push((rec[0].to_owned(), rec[1].to_owned()));
    }
    Ok(LoadedRelationship {
        spec: spec.clone(),
        pairs,
    })
}

fn build_graph(spec: &IngestSpec, datasets: &[LoadedDataset]) -> InstanceGraph {
    InstanceGraph {
        experiment: Experiment {
            id: spec.experiment.id.clone(),
            name: spec.experiment.name.clone(),
            description: spec.experiment.description.clone(),
            protocol_id: spec.protocol.id.clone(),
            dataset_ids: spec.datasets.iter().map(|d| d.id.clone()).collect(),
        },
        protocols: vec![Protocol {
            id: spec.protocol.id.clone(),
            name: spec.protocol.name.clone(),
            description: spec.protocol.description.clone(),
            code_reference: spec.protocol.code_reference.clone(),
        }],
        object_types: datasets
            .iter()
            .map(|d| ObjectType {
                id: d.spec.object_type_id(),
                label: d.spec.object_type_label.clone(),
                properties: d.schema.clone(),
            })
            .collect(),
        datasets: datasets
            .iter()
            .map(|d| OutputDataset {
                id: d.spec.id.clone(),
                name: d.spec.name.clone(),
                object_type_id: d.spec.object_type_id(),
                object_count: d.ids.len() as u64,
                storage_ref: format::dataset_ref(&d.spec.id),
            })
            .collect(),
        objects: Vec::new(),
        relationships: spec
            .relationships
            .iter()
            .map(|r| Relationship {
                name: r.name.clone(),
                source_dataset_id: r.source_dataset.clone(),
                target_dataset_id: r.target_dataset.clone(),
                pairs_ref: format::pairs_ref(&r.name),
            })
            .collect(),
    }
}

fn write_catalog(
    root: &Path,
    graph: &InstanceGraph,
    datasets: &[LoadedDataset],
    relationships: &[LoadedRelationship],
) -> Result<(), IngestError> {
    let io = |p: &Path| {
        let p: PathBuf = p.to_owned();
        move |e| IngestError::io(p, e)
    };
    fs::create_dir_all(root).map_err(io(root))?;

    for d in datasets {
        let dir = format::dataset_dir(root, &d.spec.id);
        let p = format::schema_path(&dir);
        format::write_bytes(&p, &format::render_schema(&d.schema)).map_err(io(&p))?;

        let p = format::ids_path(&dir);
        let mut ids = String::with_capacity(d.ids.len() * 8);
        for id in &d.ids {
            ids.push_str(id);
            ids.push('\n');
        }
        format::write_bytes(&p, ids.as_bytes()).map_err(io(&p))?;

        for (prop, col) in d.schema.iter().zip(&d.columns) {
            write_column(&dir, &prop.name, col)?;
        }

        if let Some(v) = &d.vectors {
            let p = format::series_data_path(&dir);
            format::write_bytes(&p, v.data_bytes()).map_err(io(&p))?;
            let p = format::series_offsets_path(&dir);
            format::write_words(
                &p,
                v.offsets
                    .iter()
                    .flat_map(|&(s, n)| [s.to_le_bytes(), n.to_le_bytes()]),
            )
            .map_err(io(&p))?;
        }
    }

    for r in relationships {
        let p = root.join(format::pairs_ref(&r.spec.name));
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(["source_id", "target_id"]).unwrap();
        for (s, t) in &r.pairs {
            w.write_record([s, t]).unwrap();
        }
        format::write_bytes(&p, &w.into_inner().unwrap()).map_err(io(&p))?;
    }

    let p = root.join(format::SIMDM);
    format::write_bytes(&p, &render_simdm(graph)).map_err(io(&p))?;

    let manifest = Manifest {
        format_version: FORMAT_VERSION.into(),
        datasets: datasets
            .iter()
            .map(|d| ManifestDataset {
                id: d.spec.id.clone(),
                row_count: d.ids.len() as u64,
                vector_role: d.spec.vector_role,
            })
            .collect(),
        relationships: relationships
            .iter()
            .map(|r| ManifestRelationship {
                name: r.spec.name.clone(),
                source_dataset: r.spec.source_dataset.clone(),
                target_dataset: r.spec.target_dataset.clone(),
                pair_count: r.pairs.len() as u64,
            })
            .collect(),
    };
    let tmp = root.join("manifest.json.tmp");
    format::write_bytes(&tmp, &crate::vo::to_canonical_json(&manifest)).map_err(io(&tmp))?;
    let p = root.join(format::MANIFEST);
    fs::rename(&tmp, &p).map_err(io(&p))?;
    Ok(())
}

fn write_column(dir: &Path, name: &str, col: &Column) -> Result<(), IngestError> {
    let io = |p: PathBuf| move |e| IngestError::io(p, e);
    match col {
        Column::Real { values, index } => {
            let p = format::values_path(dir, name);
            format::write_words(&p, values.iter().map(|v| v.to_le_bytes())).map_err(io(p))?;
            let p = format::index_path(dir, name);
            format::write_words(
                &p,
                index
                    .entries()
                    .iter()
                    .flat_map(|(v, r)| [v.to_le_bytes(), r.to_le_bytes()]),
            )
            .map_err(io(p))?;
        }
        Column::Integer { values, index } => {
            let p = format::values_path(dir, name);
            format::write_words(&p, values.iter().map(|v| v.to_le_bytes())).map_err(io(p))?;
            let p = format::index_path(dir, name);
            format::write_words(
                &p,
                index
                    .entries()
                    .iter()
                    .flat_map(|(v, r)| [v.to_le_bytes(), r.to_le_bytes()]),
            )
            .map_err(io(p))?;
        }
        Column::Text { dict, codes } => {
            let p = format::dict_path(dir, name);
            let mut text = String::new();
            for s in dict {
                text.push_str(s);
                text.push('\n');
            }
            format::write_bytes(&p, text.as_bytes()).map_err(io(p))?;
            let p = format::codes_path(dir, name);
            format::write_words(&p, codes.iter().map(|c| c.to_le_bytes())).map_err(io(p))?;
        }
    }
    Ok(())
}
