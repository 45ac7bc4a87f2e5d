//! Query-string handling for the data endpoints.
//!
//! Parameter names are upper-case and matched exactly. Values are
//! percent-decoded per RFC 3986; `+` stays a literal plus sign.

use std::collections::HashMap;

use percent_encoding::percent_decode_str;

use super::cutout::{CutoutRequest, TableFormat};
use super::error::ApiError;

/// Decoded `name -> value` pairs. Repeating a parameter is an error.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct QueryParams(HashMap<String, String>);

fn decode(s: &str) -> Result<String, ApiError> {
    percent_decode_str(s)
        .decode_utf8()
        .map(|c| c.into_owned())
        .map_err(|_| ApiError::bad_parameter(format!("parameter {s:?} is not valid UTF-8")))
}

impl QueryParams {
    pub fn parse(raw: Option<&str>) -> Result<Self, ApiError> {
        let mut map = HashMap::new();
        for part in raw.unwrap_or("").split('&').filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').unwrap_or((part, ""));
            let k = decode(k)?;
            let v = decode(v)?;
            if map.contains_key(&k) {
                return Err(ApiError::bad_parameter(format!("parameter {k} given more than once")));
            }
            map.insert(k, v);
        }
        Ok(Self(map))
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.0.get(name).map(String::as_str)
    }

    /// FORMAT, defaulting to csv.
    pub fn format(&self) -> Result<TableFormat, ApiError> {
        match self.get("FORMAT") {
            None => Ok(TableFormat::Csv),
            Some(f) => TableFormat::parse(f)
                .ok_or_else(|| ApiError::bad_parameter(format!("FORMAT must be csv or json, got {f:?}"))),
        }
    }

    pub fn cutout_request(&self) -> Result<CutoutRequest, ApiError> {
        let limit = match self.get("LIMIT") {
            None => None,
            Some(v) => match parse_count(v) {
                Some(n) if n >= 1 => Some(n),
                _ => return Err(ApiError::bad_parameter(format!("LIMIT must be a positive integer, got {v:?}"))),
            },
        };
        let offset = match self.get("OFFSET") {
            None => 0,
            Some(v) => parse_count(v).ok_or_else(|| {
                ApiError::bad_parameter(format!("OFFSET must be a non-negative integer, got {v:?}"))
            })?,
        };
        Ok(CutoutRequest {
            where_clause: self.get("WHERE").map(str::to_owned),
            fields: self.get("FIELDS").and_then(parse_fields),
            limit,
            offset,
            format: self.format()?,
        })
    }
}

fn parse_count(s: &str) -> Option<usize> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Splits a FIELDS list. An empty list means every property; `id` is always
/// emitted first and may be listed without effect.
pub fn parse_fields(s: &str) -> Option<Vec<String>> {
    let fields: Vec<String> = s
        .split(',')
        .map(str::trim)
        .filter(|f| !f.is_empty() && *f != "id")
        .map(str::to_owned)
        .collect();
    if s.trim().is_empty() {
        None
    } else {
        Some(fields)
    }
}
