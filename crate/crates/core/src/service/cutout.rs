//! Tabular bodies for cutouts, rawdata and vector series.
//!
//! CSV: a header line then one line per row, LF-terminated, RFC 4180
//! quoting. JSON: `[]` for no rows, otherwise one compact object per line
//! inside `[` and `]`, keys in column order. Both end with a newline and
//! render reals in their shortest round-trip form.

use std::ops::{Deref, Range};

use crate::catalog::{Dataset, VectorSeries};
use crate::query::{compile, select_rows};
use crate::scalar::{format_real, Scalar};

use super::error::ApiError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TableFormat {
    #[default]
    Csv,
    Json,
}

impl TableFormat {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(TableFormat::Csv),
            "json" => Some(TableFormat::Json),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TableFormat::Csv => "csv",
            TableFormat::Json => "json",
        }
    }

    pub fn media_type(self) -> &'static str {
        match self {
            TableFormat::Csv => super::CSV,
            TableFormat::Json => super::JSON,
        }
    }
}

/// A cutout as requested over HTTP or from the command line.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CutoutRequest {
    /// Constraint text; empty or blank means no constraint.
    pub where_clause: Option<String>,
    /// Properties after the id column; `None` selects all.
    pub fields: Option<Vec<String>>,
    pub limit: Option<usize>,
    pub offset: usize,
    pub format: TableFormat,
}

/// Incremental writer shared by buffered and streamed responses, so both
/// produce identical bytes.
pub struct TableWriter {
    format: TableFormat,
    header: Vec<String>,
    written: usize,
}

impl TableWriter {
    pub fn new(format: TableFormat, header: Vec<String>) -> Self {
        Self {
            format,
            header,
            written: 0,
        }
    }

    pub fn begin(&self, out: &mut Vec<u8>, empty: bool) {
        match self.format {
            TableFormat::Csv => self.csv_record(out, self.header.iter().map(String::as_str)),
            TableFormat::Json if empty => out.extend_from_slice(b"[]\n"),
            TableFormat::Json => out.extend_from_slice(b"[\n"),
        }
    }

    /// One row; `values` lines up with the header.
    pub fn row<'a>(&mut self, out: &mut Vec<u8>, values: impl IntoIterator<Item = Cell<'a>>) {
        match self.format {
            TableFormat::Csv => {
                let cells: Vec<String> = values.into_iter().map(|c| c.text()).collect();
                self.csv_record(out, cells.iter().map(String::as_str));
            }
            TableFormat::Json => {
                if self.written > 0 {
                    out.extend_from_slice(b",\n");
                }
                out.extend_from_slice(b"  {");
                for (i, (name, cell)) in self.header.iter().zip(values).enumerate() {
                    if i > 0 {
                        out.push(b',');
                    }
                    json_string(out, name);
                    out.push(b':');
                    cell.json(out);
                }
                out.push(b'}');
            }
        }
        self.written += 1;
    }

    pub fn finish(&self, out: &mut Vec<u8>) {
        if self.format == TableFormat::Json && self.written > 0 {
            out.extend_from_slice(b"\n]\n");
        }
    }

    fn csv_record<'a>(&self, out: &mut Vec<u8>, fields: impl Iterator<Item = &'a str>) {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(fields).expect("in-memory CSV write");
        out.extend_from_slice(&w.into_inner().expect("in-memory CSV flush"));
    }
}

/// A value to render.
#[derive(Debug, Clone, Copy)]
pub enum Cell<'a> {
    Text(&'a str),
    Real(f64),
    Integer(i64),
}

impl<'a> From<&'a Scalar> for Cell<'a> {
    fn from(s: &'a Scalar) -> Self {
        match s {
            Scalar::Real(v) => Cell::Real(*v),
            Scalar::Integer(v) => Cell::Integer(*v),
            Scalar::Text(v) => Cell::Text(v),
        }
    }
}

impl Cell<'_> {
    fn text(self) -> String {
        match self {
            Cell::Text(s) => s.to_owned(),
            Cell::Real(v) => format_real(v),
            Cell::Integer(v) => v.to_string(),
        }
    }

    fn json(self, out: &mut Vec<u8>) {
        match self {
            Cell::Text(s) => json_string(out, s),
            Cell::Real(v) if v.is_finite() => out.extend_from_slice(format_real(v).as_bytes()),
            Cell::Real(_) => out.extend_from_slice(b"null"),
            Cell::Integer(v) => out.extend_from_slice(v.to_string().as_bytes()),
        }
    }
}

fn json_string(out: &mut Vec<u8>, s: &str) {
    serde_json::to_writer(&mut *out, s).expect("in-memory JSON write");
}

/// Header of a scalar table: `id` then the projected property names.
pub fn table_header(dataset: &Dataset, cols: &[usize]) -> Vec<String> {
    std::iter::once("id".to_owned())
        .chain(cols.iter().map(|&c| dataset.schema()[c].name.clone()))
        .collect()
}

/// Appends scalar rows to `out`.
pub fn write_rows(writer: &mut TableWriter, out: &mut Vec<u8>, dataset: &Dataset, cols: &[usize], rows: impl IntoIterator<Item = usize>) {
    for row in rows {
        let values: Vec<Scalar> = cols.iter().map(|&c| dataset.value(row, c)).collect();
        writer.row(
            out,
            std::iter::once(Cell::Text(dataset.id_of(row))).chain(values.iter().map(Cell::from)),
        );
    }
}

/// Rows selected by a request, ascending, after OFFSET and LIMIT.
pub fn cutout_rows(dataset: &Dataset, req: &CutoutRequest) -> Result<Vec<usize>, ApiError> {
    let selected = match req.where_clause.as_deref().map(str::trim) {
        None | Some("") => (0..dataset.row_count()).collect(),
        Some(text) => select_rows(&compile(text, dataset.schema())?, dataset),
    };
    let start = req.offset.min(selected.len());
    let end = match req.limit {
        Some(l) => start.saturating_add(l).min(selected.len()),
        None => selected.len(),
    };
    Ok(selected[start..end].to_vec())
}

/// Complete cutout body. Fails with `bad_parameter` when more than
/// `row_cap` rows would be returned.
pub fn cutout_body(dataset: &Dataset, req: &CutoutRequest, row_cap: usize) -> Result<Vec<u8>, ApiError> {
    let cols = dataset.projection(req.fields.as_deref())?;
    let rows = cutout_rows(dataset, req)?;
    if rows.len() > row_cap {
        return Err(ApiError::bad_parameter(format!(
            "cutout would return {} rows, above the limit of {row_cap}; use LIMIT and OFFSET or rawdata",
            rows.len()
        )));
    }
    let mut writer = TableWriter::new(req.format, table_header(dataset, &cols));
    let mut out = Vec::new();
    writer.begin(&mut out, rows.is_empty());
    write_rows(&mut writer, &mut out, dataset, &cols, rows);
    writer.finish(&mut out);
    Ok(out)
}

/// One object's vector series as a table of its role columns.
pub fn vector_body(series: &VectorSeries, format: TableFormat) -> Vec<u8> {
    let header = series.column_names().iter().map(|s| (*s).to_owned()).collect();
    let mut writer = TableWriter::new(format, header);
    let mut out = Vec::new();
    writer.begin(&mut out, series.points() == 0);
    for i in 0..series.points() {
        writer.row(&mut out, series.point(i).map(Cell::Real));
    }
    writer.finish(&mut out);
    out
}

/// Lazily rendered chunks of a full table; the concatenation equals the
/// unfiltered cutout body.
pub struct RawChunks<D> {
    dataset: D,
    writer: TableWriter,
    cols: Vec<usize>,
    next: usize,
    chunk_rows: usize,
    state: ChunkState,
}

#[derive(PartialEq, Eq)]
enum ChunkState {
    Start,
    Rows,
    Done,
}

impl<D: Deref<Target = Dataset>> RawChunks<D> {
    pub fn new(dataset: D, format: TableFormat, chunk_rows: usize) -> Self {
        let d = &*dataset;
        let cols: Vec<usize> = (0..d.schema().len()).collect();
        let writer = TableWriter::new(format, table_header(d, &cols));
        Self {
            dataset,
            writer,
            cols,
            next: 0,
            chunk_rows: chunk_rows.max(1),
            state: ChunkState::Start,
        }
    }
}

impl<D: Deref<Target = Dataset>> Iterator for RawChunks<D> {
    type Item = Vec<u8>;

    fn next(&mut self) -> Option<Vec<u8>> {
        let d = &*self.dataset;
        let n = d.row_count();
        let mut out = Vec::new();
        match self.state {
            ChunkState::Done => return None,
            ChunkState::Start => {
                self.writer.begin(&mut out, n == 0);
                self.state = ChunkState::Rows;
            }
            ChunkState::Rows => {}
        }
        let range: Range<usize> = self.next..(self.next + self.chunk_rows).min(n);
        self.next = range.end;
        write_rows(&mut self.writer, &mut out, d, &self.cols, range);
        if self.next >= n {
            self.writer.finish(&mut out);
            self.state = ChunkState::Done;
        }
        Some(out)
    }
}

/// Lazily rendered `id,<role columns>` CSV of every series in a dataset.
pub struct VectorChunks<D> {
    dataset: D,
    next: usize,
    chunk_rows: usize,
    started: bool,
}

impl<D: Deref<Target = Dataset>> VectorChunks<D> {
    /// `None` when the dataset has no vector data.
    pub fn new(dataset: D, chunk_rows: usize) -> Option<Self> {
        dataset.vectors()?;
        Some(Self {
            dataset,
            next: 0,
            chunk_rows: chunk_rows.max(1),
            started: false,
        })
    }
}

impl<D: Deref<Target = Dataset>> Iterator for VectorChunks<D> {
    type Item = Vec<u8>;

    fn next(&mut self) -> Option<Vec<u8>> {
        let d = &*self.dataset;
        let store = d.vectors()?;
        let header: Vec<String> = std::iter::once("id")
            .chain(store.role().columns().iter().copied())
            .map(str::to_owned)
            .collect();
        let mut writer = TableWriter::new(TableFormat::Csv, header);
        let mut out = Vec::new();
        if !self.started {
            self.started = true;
            writer.begin(&mut out, false);
        } else if self.next >= d.row_count() {
            return None;
        }
        let end = (self.next + self.chunk_rows).min(d.row_count());
        for row in self.next..end {
            let series = store.series(row);
            for i in 0..series.points() {
                writer.row(
                    &mut out,
                    std::iter::once(Cell::Text(d.id_of(row))).chain(series.point(i).map(Cell::Real)),
                );
            }
        }
        self.next = end;
        Some(out)
    }
}
