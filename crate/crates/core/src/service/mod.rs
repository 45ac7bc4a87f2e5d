//! HTTP data-access API over an opened catalog.
//!
//! VOSI resources (`/availability`, `/capabilities`, `/tables`) are always
//! served. The data routes under `/datasets` and `/relationships` answer
//! 503 when the service was started unavailable. Every error body is an
//! [`ErrorDocument`].

mod cutout;
mod error;
mod handlers;
mod params;

use std::future::Future;
use std::ops::Deref;
use std::sync::Arc;
use std::time::Instant;

use axum::extract::{Request, State};
use axum::middleware::{self, Next};
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use chrono::Utc;
use thiserror::Error;
use tokio::net::TcpListener;

use crate::catalog::{Catalog, Dataset};
use crate::simdm::validate_graph;
use crate::vo::{AvailabilityState, ConfigError, ServiceConfig};

pub use cutout::{
    cutout_body, cutout_rows, table_header, vector_body, write_rows, Cell, CutoutRequest, RawChunks,
    TableFormat, TableWriter, VectorChunks,
};
pub use error::{ApiError, ErrorCode, ErrorDocument};
pub use params::{parse_fields, QueryParams};

pub const XML: &str = "application/xml";
pub const JSON: &str = "application/json";
pub const CSV: &str = "text/csv; charset=utf-8";

/// Default cap on rows in a buffered cutout response.
pub const DEFAULT_ROW_CAP: usize = 1_000_000;

/// Rows rendered per chunk of a streamed response.
const STREAM_CHUNK_ROWS: usize = 4096;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("invalid service configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("catalog metadata is invalid:\n{0}")]
    InvalidGraph(crate::simdm::ValidationReport),
}

/// Shared read-only state behind every handler.
#[derive(Debug)]
pub struct ServiceState {
    pub catalog: Arc<Catalog>,
    pub config: ServiceConfig,
    pub availability: AvailabilityState,
    pub started: Instant,
    pub row_cap: usize,
    pub log_requests: bool,
}

impl ServiceState {
    pub fn new(catalog: Arc<Catalog>, config: ServiceConfig, available: bool) -> Result<Self, ServiceError> {
        config.validate()?;
        let report = validate_graph(catalog.graph());
        if !report.is_valid() {
            return Err(ServiceError::InvalidGraph(report));
        }
        let note = if available { "" } else { "data access disabled by the operator" };
        Ok(Self {
            catalog,
            config,
            availability: AvailabilityState::new(available, Utc::now(), note),
            started: Instant::now(),
            row_cap: DEFAULT_ROW_CAP,
            log_requests: false,
        })
    }

    pub fn with_row_cap(mut self, cap: usize) -> Self {
        self.row_cap = cap;
        self
    }

    pub fn with_request_log(mut self, on: bool) -> Self {
        self.log_requests = on;
        self
    }

    fn require_available(&self) -> Result<(), ApiError> {
        if self.availability.available {
            Ok(())
        } else {
            Err(ApiError::new(ErrorCode::Unavailable, "the data access service is unavailable"))
        }
    }

    fn dataset(&self, id: &str) -> Result<SharedDataset, ApiError> {
        let index = self
            .catalog
            .datasets()
            .iter()
            .position(|d| d.id() == id)
            .ok_or_else(|| ApiError::new(ErrorCode::UnknownDataset, format!("unknown dataset {id:?}")))?;
        Ok(SharedDataset {
            catalog: Arc::clone(&self.catalog),
            index,
        })
    }
}

/// A dataset kept alive by its catalog handle, for streamed bodies.
#[derive(Clone)]
pub struct SharedDataset {
    catalog: Arc<Catalog>,
    index: usize,
}

impl Deref for SharedDataset {
    type Target = Dataset;

    fn deref(&self) -> &Dataset {
        &self.catalog.datasets()[self.index]
    }
}

pub fn router(state: Arc<ServiceState>) -> Router {
    use handlers::*;
    Router::new()
        .route("/availability", get(availability))
        .route("/capabilities", get(capabilities))
        .route("/tables", get(tables))
        .route("/datasets", get(datasets))
        .route("/datasets/{id}", get(dataset_detail))
        .route("/datasets/{id}/objects/{object}", get(object))
        .route("/datasets/{id}/objects/{object}/vector", get(object_vector))
        .route("/datasets/{id}/cutout", get(cutout))
        .route("/datasets/{id}/rawdata", get(rawdata))
        .route("/datasets/{id}/rawdata/vectors", get(rawdata_vectors))
        .route("/relationships/{name}", get(related))
        .fallback(not_found)
        .method_not_allowed_fallback(method_not_allowed)
        .layer(middleware::from_fn_with_state(Arc::clone(&state), log_request))
        .with_state(state)
}

async fn log_request(State(state): State<Arc<ServiceState>>, req: Request, next: Next) -> Response {
    if !state.log_requests {
        return next.run(req).await;
    }
    let method = req.method().clone();
    let path = req.uri().path().to_owned();
    let start = Instant::now();
    let resp = next.run(req).await;
    eprintln!(
        "{method} {path} {} {:.3}ms",
        resp.status().as_u16(),
        start.elapsed().as_secs_f64() * 1e3
    );
    resp
}

/// Serves until `shutdown` resolves, then drains in-flight requests.
pub async fn serve(
    listener: TcpListener,
    state: Arc<ServiceState>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
}
