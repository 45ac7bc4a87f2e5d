use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use serde::{Deserialize, Serialize};

use crate::catalog::CatalogError;
use crate::query::{QueryError, TypeCheckError};
use crate::vo::to_canonical_json;

/// Stable machine-readable error tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorCode {
    InvalidQuery,
    UnknownProperty,
    TypeError,
    UnknownDataset,
    UnknownObject,
    UnknownRelationship,
    Unavailable,
    BadParameter,
    Internal,
}

impl ErrorCode {
    pub const ALL: [ErrorCode; 9] = [
        ErrorCode::InvalidQuery,
        ErrorCode::UnknownProperty,
        ErrorCode::TypeError,
        ErrorCode::UnknownDataset,
        ErrorCode::UnknownObject,
        ErrorCode::UnknownRelationship,
        ErrorCode::Unavailable,
        ErrorCode::BadParameter,
        ErrorCode::Internal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::InvalidQuery => "invalid_query",
            ErrorCode::UnknownProperty => "unknown_property",
            ErrorCode::TypeError => "type_error",
            ErrorCode::UnknownDataset => "unknown_dataset",
            ErrorCode::UnknownObject => "unknown_object",
            ErrorCode::UnknownRelationship => "unknown_relationship",
            ErrorCode::Unavailable => "unavailable",
            ErrorCode::BadParameter => "bad_parameter",
            ErrorCode::Internal => "internal",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == s)
    }

    fn status(self) -> StatusCode {
        match self {
            ErrorCode::InvalidQuery
            | ErrorCode::UnknownProperty
            | ErrorCode::TypeError
            | ErrorCode::BadParameter => StatusCode::BAD_REQUEST,
            ErrorCode::UnknownDataset | ErrorCode::UnknownObject | ErrorCode::UnknownRelationship => {
                StatusCode::NOT_FOUND
            }
            ErrorCode::Unavailable => StatusCode::SERVICE_UNAVAILABLE,
            ErrorCode::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

/// Body of every 4xx/5xx response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorDocument {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{}: {message}", code.as_str())]
pub struct ApiError {
    pub status: StatusCode,
    pub code: ErrorCode,
    pub message: String,
    pub offset: Option<usize>,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        Self {
            status: code.status(),
            code,
            message: message.into(),
            offset: None,
        }
    }

    pub fn with_status(mut self, status: StatusCode) -> Self {
        self.status = status;
        self
    }

    pub fn bad_parameter(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::BadParameter, message)
    }

    pub fn document(&self) -> ErrorDocument {
        ErrorDocument {
            code: self.code.as_str().to_owned(),
            message: self.message.clone(),
            offset: self.offset,
        }
    }
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        let code = match &e {
            QueryError::Lex(_) | QueryError::Parse(_) => ErrorCode::InvalidQuery,
            QueryError::Type(TypeCheckError::UnknownProperty { .. }) => ErrorCode::UnknownProperty,
            QueryError::Type(TypeCheckError::TypeError { .. }) => ErrorCode::TypeError,
        };
        let mut err = ApiError::new(code, e.to_string());
        err.offset = e.offset();
        err
    }
}

impl From<CatalogError> for ApiError {
    fn from(e: CatalogError) -> Self {
        let code = match &e {
            CatalogError::UnknownDataset(_) => ErrorCode::UnknownDataset,
            CatalogError::UnknownProperty(_) => ErrorCode::UnknownProperty,
            CatalogError::NotNumeric(_) => ErrorCode::TypeError,
            CatalogError::InvalidRange { .. } => ErrorCode::BadParameter,
            CatalogError::UnknownObject(_) | CatalogError::NoVectorData(_) => ErrorCode::UnknownObject,
            CatalogError::UnknownRelationship(_) => ErrorCode::UnknownRelationship,
            CatalogError::FormatVersionMismatch { .. }
            | CatalogError::Corrupt(_)
            | CatalogError::Io { .. }
            | CatalogError::RowOutOfRange { .. } => ErrorCode::Internal,
        };
        ApiError::new(code, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = to_canonical_json(&self.document());
        let mut resp = (self.status, body).into_response();
        resp.headers_mut()
            .insert(header::CONTENT_TYPE, HeaderValue::from_static(super::JSON));
        resp
    }
}
