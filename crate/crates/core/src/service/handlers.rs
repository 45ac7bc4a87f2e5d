use std::convert::Infallible;
use std::sync::Arc;

use axum::body::Body;
use axum::extract::rejection::PathRejection;
use axum::extract::{Path, RawQuery, State};
use axum::http::{header, HeaderValue, Method, StatusCode, Uri};
use axum::response::Response;
use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use serde::Serialize;

use super::cutout::{cutout_body, vector_body, RawChunks, TableFormat, VectorChunks};
use super::error::{ApiError, ErrorCode};
use super::params::QueryParams;
use super::{ServiceState, SharedDataset, CSV, JSON, STREAM_CHUNK_ROWS, XML};
use crate::simdm::{related_objects, NodeKind, RelatedError};
use crate::vo::{
    render_availability, render_capabilities, render_tables, to_canonical_json, DatasetNode, ObjectTypeNode,
    ValueNode,
};

type ApiResult = Result<Response, ApiError>;
type AppState = State<Arc<ServiceState>>;

/// Unreserved characters pass through; everything else in a path segment
/// is escaped.
const SEGMENT: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'.').remove(b'_').remove(b'~');

fn segment(s: &str) -> String {
    utf8_percent_encode(s, SEGMENT).to_string()
}

fn body(media_type: &'static str, bytes: impl Into<Body>) -> Response {
    let mut resp = Response::new(bytes.into());
    resp.headers_mut()
        .insert(header::CONTENT_TYPE, HeaderValue::from_static(media_type));
    resp
}

fn json<T: Serialize>(value: &T) -> Response {
    body(JSON, to_canonical_json(value))
}

fn path<T>(p: Result<Path<T>, PathRejection>) -> Result<T, ApiError> {
    p.map(|Path(v)| v)
        .map_err(|e| ApiError::bad_parameter(format!("bad path: {}", e.body_text())))
}

impl ServiceState {
    fn dataset_url(&self, id: &str) -> String {
        format!("{}/datasets/{}", self.config.base_url, segment(id))
    }

    fn object_url(&self, dataset: &str, object: &str) -> String {
        format!("{}/objects/{}", self.dataset_url(dataset), segment(object))
    }

    fn available_dataset(&self, id: &str) -> Result<SharedDataset, ApiError> {
        self.require_available()?;
        self.dataset(id)
    }
}

pub(super) async fn availability(State(state): AppState) -> Response {
    body(XML, render_availability(&state.availability))
}

pub(super) async fn capabilities(State(state): AppState) -> ApiResult {
    let doc = render_capabilities(&state.config)
        .map_err(|e| ApiError::new(ErrorCode::Internal, format!("unknown capability id {:?}", e.0)))?;
    Ok(body(XML, doc))
}

pub(super) async fn tables(State(state): AppState) -> Response {
    body(XML, render_tables(state.catalog.graph()))
}

#[derive(Serialize)]
struct DatasetEntry {
    id: String,
    name: String,
    utype: &'static str,
    object_type_id: String,
    object_count: u64,
    vector_role: &'static str,
    links: DatasetLinks,
}

#[derive(Serialize)]
struct DatasetLinks {
    detail: String,
    cutout: String,
    rawdata: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    vectors: Option<String>,
}

pub(super) async fn datasets(State(state): AppState) -> ApiResult {
    state.require_available()?;
    let entries: Vec<DatasetEntry> = state
        .catalog
        .graph()
        .datasets
        .iter()
        .map(|d| {
            let url = state.dataset_url(&d.id);
            let role = state.catalog.dataset(&d.id).map(|ds| ds.vector_role()).unwrap_or_default();
            DatasetEntry {
                id: d.id.clone(),
                name: d.name.clone(),
                utype: NodeKind::OutputDataset.utype(),
                object_type_id: d.object_type_id.clone(),
                object_count: d.object_count,
                vector_role: role.as_str(),
                links: DatasetLinks {
                    detail: url.clone(),
                    cutout: format!("{url}/cutout"),
                    rawdata: format!("{url}/rawdata"),
                    vectors: (role.width() > 0).then(|| format!("{url}/rawdata/vectors")),
                },
            }
        })
        .collect();
    Ok(json(&entries))
}

#[derive(Serialize)]
struct DatasetDetail {
    dataset: DatasetNode,
    object_type: ObjectTypeNode,
    relationships: Vec<String>,
}

pub(super) async fn dataset_detail(
    State(state): AppState,
    id: Result<Path<String>, PathRejection>,
) -> ApiResult {
    let id = path(id)?;
    state.available_dataset(&id)?;
    let graph = state.catalog.graph();
    let ds = graph
        .dataset(&id)
        .ok_or_else(|| ApiError::new(ErrorCode::UnknownDataset, format!("unknown dataset {id:?}")))?;
    let ot = graph
        .dataset_type(&id)
        .ok_or_else(|| ApiError::new(ErrorCode::Internal, format!("dataset {id:?} has no object type")))?;
    Ok(json(&DatasetDetail {
        dataset: ds.into(),
        object_type: ot.into(),
        relationships: graph.relationships_touching(&id).map(|r| r.name.clone()).collect(),
    }))
}

#[derive(Serialize)]
struct ObjectDocument {
    id: String,
    utype: &'static str,
    dataset_id: String,
    values: Vec<ValueNode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    vector: Option<String>,
}

fn object_row(ds: &SharedDataset, object: &str) -> Result<usize, ApiError> {
    ds.row_of(object).ok_or_else(|| {
        ApiError::new(
            ErrorCode::UnknownObject,
            format!("unknown object {object:?} in dataset {:?}", ds.id()),
        )
    })
}

pub(super) async fn object(
    State(state): AppState,
    p: Result<Path<(String, String)>, PathRejection>,
) -> ApiResult {
    let (id, object) = path(p)?;
    let ds = state.available_dataset(&id)?;
    let row = object_row(&ds, &object)?;
    let values = ds
        .schema()
        .iter()
        .enumerate()
        .map(|(c, p)| ValueNode::new(&p.name, &ds.value(row, c)))
        .collect();
    Ok(json(&ObjectDocument {
        id: object.clone(),
        utype: NodeKind::DataObject.utype(),
        dataset_id: id.clone(),
        values,
        vector: ds
            .vectors()
            .map(|_| format!("{}/vector", state.object_url(&id, &object))),
    }))
}

pub(super) async fn object_vector(
    State(state): AppState,
    p: Result<Path<(String, String)>, PathRejection>,
    RawQuery(query): RawQuery,
) -> ApiResult {
    let (id, object) = path(p)?;
    let format = QueryParams::parse(query.as_deref())?.format()?;
    let ds = state.available_dataset(&id)?;
    object_row(&ds, &object)?;
    let series = ds.fetch_vector(&object)?;
    Ok(body(format.media_type(), vector_body(&series, format)))
}

pub(super) async fn cutout(
    State(state): AppState,
    id: Result<Path<String>, PathRejection>,
    RawQuery(query): RawQuery,
) -> ApiResult {
    let id = path(id)?;
    let req = QueryParams::parse(query.as_deref())?.cutout_request()?;
    let ds = state.available_dataset(&id)?;
    let cap = state.row_cap;
    let format = req.format;
    let bytes = tokio::task::spawn_blocking(move || cutout_body(&ds, &req, cap))
        .await
        .map_err(|e| ApiError::new(ErrorCode::Internal, e.to_string()))??;
    Ok(body(format.media_type(), bytes))
}

fn stream(chunks: impl Iterator<Item = Vec<u8>> + Send + 'static) -> Body {
    Body::from_stream(futures::stream::iter(chunks.map(Ok::<_, Infallible>)))
}

pub(super) async fn rawdata(
    State(state): AppState,
    id: Result<Path<String>, PathRejection>,
    RawQuery(query): RawQuery,
) -> ApiResult {
    let id = path(id)?;
    let format = QueryParams::parse(query.as_deref())?.format()?;
    let ds = state.available_dataset(&id)?;
    Ok(body(format.media_type(), stream(RawChunks::new(ds, format, STREAM_CHUNK_ROWS))))
}

pub(super) async fn rawdata_vectors(
    State(state): AppState,
    id: Result<Path<String>, PathRejection>,
    RawQuery(query): RawQuery,
) -> ApiResult {
    let id = path(id)?;
    if QueryParams::parse(query.as_deref())?.format()? != TableFormat::Csv {
        return Err(ApiError::bad_parameter("vector streams are only available as csv"));
    }
    let ds = state.available_dataset(&id)?;
    let chunks = VectorChunks::new(ds, STREAM_CHUNK_ROWS).ok_or_else(|| {
        ApiError::new(ErrorCode::UnknownDataset, format!("dataset {id:?} has no vector data"))
    })?;
    Ok(body(CSV, stream(chunks)))
}

#[derive(Serialize)]
struct RelatedTarget {
    id: String,
    link: String,
}

pub(super) async fn related(
    State(state): AppState,
    name: Result<Path<String>, PathRejection>,
    RawQuery(query): RawQuery,
) -> ApiResult {
    let name = path(name)?;
    let params = QueryParams::parse(query.as_deref())?;
    state.require_available()?;
    let source = params
        .get("source")
        .ok_or_else(|| ApiError::bad_parameter("missing parameter source"))?;
    let targets = related_objects(&*state.catalog, &name, source).map_err(|e| match e {
        RelatedError::UnknownRelationship(_) => ApiError::new(ErrorCode::UnknownRelationship, e.to_string()),
        RelatedError::UnknownObject { .. } => ApiError::new(ErrorCode::UnknownObject, e.to_string()),
    })?;
    let target_ds = &state
        .catalog
        .graph()
        .relationship(&name)
        .expect("relationship resolved above")
        .target_dataset_id;
    let list: Vec<RelatedTarget> = targets
        .into_iter()
        .map(|t| RelatedTarget {
            link: state.object_url(target_ds, &t),
            id: t,
        })
        .collect();
    Ok(json(&list))
}

pub(super) async fn not_found(uri: Uri) -> ApiError {
    ApiError::bad_parameter(format!("no resource at {}", uri.path())).with_status(StatusCode::NOT_FOUND)
}

pub(super) async fn method_not_allowed(method: Method, uri: Uri) -> ApiError {
    ApiError::bad_parameter(format!("{method} is not supported on {}; the API is read-only", uri.path()))
        .with_status(StatusCode::METHOD_NOT_ALLOWED)
}
