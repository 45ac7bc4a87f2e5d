//! Shared generators, fixtures and oracles for the integration tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use proptest::prelude::*;
use rand::seq::IndexedRandom;
use rand::Rng;
use simdal_core::catalog::{ingest, Catalog, ColumnValues, Dataset, IngestSpec};
use simdal_core::query::{CmpOp, ConstraintExpr, Literal, Number};
use simdal_core::service::ServiceState;
use simdal_core::simdm::*;
use simdal_core::vo::ServiceConfig;
use simdal_core::{Datatype, Scalar};
use tempfile::TempDir;

pub const BASE_URL: &str = "http://localhost:8080/simdal";

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn mini_spec() -> IngestSpec {
    IngestSpec::from_file(&fixtures().join("mini/spec.json")).unwrap()
}

/// Ingests the mini fixture into a fresh directory.
pub fn mini_catalog() -> (TempDir, Catalog) {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("catalog");
    ingest(&mini_spec(), &out).unwrap();
    let cat = Catalog::open_verified(&out).unwrap();
    (tmp, cat)
}

pub fn state(catalog: Catalog, available: bool) -> Arc<ServiceState> {
    Arc::new(ServiceState::new(Arc::new(catalog), ServiceConfig::new(BASE_URL), available).unwrap())
}

/// Generates, ingests and opens a synthetic grid.
pub fn grid_catalog(models: usize, seed: u64) -> (TempDir, Catalog) {
    let tmp = TempDir::new().unwrap();
    let src = tmp.path().join("grid");
    simdal_core::synth::generate(models, seed, &src).unwrap();
    let spec = IngestSpec::from_file(&src.join("spec.json")).unwrap();
    let out = tmp.path().join("catalog");
    ingest(&spec, &out).unwrap();
    (tmp, Catalog::open(&out).unwrap())
}

// ---------------------------------------------------------------------------
// Instance graphs

fn text() -> impl Strategy<Value = String> {
    prop_oneof![
        Just(String::new()),
        "[a-zA-Z0-9 _.-]{1,12}",
        any::<String>().prop_map(|s| s.chars().take(12).collect()),
    ]
}

fn scalar_of(dt: Datatype) -> BoxedStrategy<Scalar> {
    match dt {
        Datatype::Real => prop_oneof![
            any::<f64>().prop_filter("finite", |v| v.is_finite()),
            Just(-0.0),
            Just(100.0),
            Just(f64::MIN_POSITIVE / 4.0),
        ]
        .prop_map(Scalar::Real)
        .boxed(),
        Datatype::Integer => any::<i64>().prop_map(Scalar::Integer).boxed(),
        Datatype::Text => text().prop_map(Scalar::Text).boxed(),
    }
}

fn datatype() -> impl Strategy<Value = Datatype> {
    prop_oneof![Just(Datatype::Real), Just(Datatype::Integer), Just(Datatype::Text)]
}

fn object_type(i: usize) -> impl Strategy<Value = ObjectType> {
    (
        prop::collection::vec((datatype(), text(), text()), 1..5),
        prop_oneof![Just(SNAPSHOT_LABEL.to_owned()), "urn:[a-z]{1,8}(#[A-Za-z]{1,8})?"],
    )
        .prop_map(move |(props, label)| ObjectType {
            id: format!("type_{i}"),
            label,
            properties: props
                .into_iter()
                .enumerate()
                .map(|(j, (datatype, unit, description))| PropertyDef {
                    name: format!("p{j}"),
                    datatype,
                    unit,
                    description,
                })
                .collect(),
        })
}

/// Valid instance graphs: unique ids, resolvable references, and objects
/// carrying a well-typed value for every property of their type.
pub fn arb_graph() -> impl Strategy<Value = InstanceGraph> {
    (1usize..4, 1usize..5, 1usize..3)
        .prop_flat_map(|(n_types, n_datasets, n_protocols)| {
            let types: Vec<_> = (0..n_types).map(object_type).collect();
            (
                types,
                prop::collection::vec((0..n_types, text(), 0u64..1_000_000), n_datasets),
                prop::collection::vec((text(), text(), text()), n_protocols),
                prop::collection::vec((0..n_datasets, 0..n_datasets), 0..4),
                (text(), text()),
                Just(n_datasets),
            )
        })
        .prop_flat_map(|(types, datasets, protocols, rels, exp, n_datasets)| {
            let type_of: Vec<usize> = datasets.iter().map(|d| d.0).collect();
            let types_for_objects = types.clone();
            let objects = prop::collection::vec(0..n_datasets, 0..6).prop_flat_map(move |dss| {
                dss.into_iter()
                    .enumerate()
                    .map(|(k, ds)| {
                        let t = &types_for_objects[type_of[ds]];
                        let values: Vec<_> = t
                            .properties
                            .iter()
                            .map(|p| {
                                let name = p.name.clone();
                                scalar_of(p.datatype).prop_map(move |value| PropertyValue {
                                    property_name: name.clone(),
                                    value,
                                })
                            })
                            .collect();
                        values.prop_map(move |values| DataObject {
                            id: format!("obj_{k}"),
                            dataset_id: format!("ds_{ds}"),
                            values,
                        })
                    })
                    .collect::<Vec<_>>()
            });
            (Just((types, datasets, protocols, rels, exp)), objects)
        })
        .prop_map(|((types, datasets, protocols, rels, exp), objects)| InstanceGraph {
            experiment: Experiment {
                id: "experiment".into(),
                name: exp.0,
                description: exp.1,
                protocol_id: "protocol_0".into(),
                dataset_ids: (0..datasets.len()).map(|i| format!("ds_{i}")).collect(),
            },
            protocols: protocols
                .into_iter()
                .enumerate()
                .map(|(i, (name, description, code_reference))| Protocol {
                    id: format!("protocol_{i}"),
                    name,
                    description,
                    code_reference,
                })
                .collect(),
            object_types: types,
            datasets: datasets
                .into_iter()
                .enumerate()
                .map(|(i, (t, name, count))| OutputDataset {
                    id: format!("ds_{i}"),
                    name,
                    object_type_id: format!("type_{t}"),
                    object_count: count,
                    storage_ref: format!("datasets/ds_{i}"),
                })
                .collect(),
            objects,
            relationships: rels
                .into_iter()
                .enumerate()
                .map(|(i, (s, t))| Relationship {
                    name: format!("Rel{i}"),
                    source_dataset_id: format!("ds_{s}"),
                    target_dataset_id: format!("ds_{t}"),
                    pairs_ref: format!("relationships/Rel{i}.csv"),
                })
                .collect(),
        })
}

/// Structural equality where reals must match bit for bit.
pub fn graphs_identical(a: &InstanceGraph, b: &InstanceGraph) -> bool {
    a == b
        && a.objects.iter().zip(&b.objects).all(|(x, y)| {
            x.values
                .iter()
                .zip(&y.values)
                .all(|(u, v)| u.value.bit_eq(&v.value))
        })
}

// ---------------------------------------------------------------------------
// Datasets and predicates

const REAL_POOL: [f64; 8] = [-2.5, -1.0, -0.0, 0.0, 0.5, 1.0, 3.25, 100.0];
const TEXT_POOL: [&str; 4] = ["alpha", "beta", "it's", ""];

/// A dataset of up to `max_rows` rows with 1..=8 numeric properties and
/// sometimes one text property. Values are drawn from small pools so ties
/// and exact-boundary hits are common.
pub fn random_dataset(rng: &mut impl Rng, max_rows: usize) -> Dataset {
    let rows = rng.random_range(0..=max_rows);
    let numeric = rng.random_range(1..=8);
    let mut schema = Vec::new();
    let mut values = Vec::new();
    for i in 0..numeric {
        let dt = if rng.random_bool(0.5) { Datatype::Real } else { Datatype::Integer };
        schema.push(PropertyDef {
            name: format!("p{i}"),
            datatype: dt,
            unit: String::new(),
            description: String::new(),
        });
        values.push(match dt {
            Datatype::Real => ColumnValues::Real((0..rows).map(|_| random_real(rng)).collect()),
            _ => ColumnValues::Integer((0..rows).map(|_| rng.random_range(-6..=6)).collect()),
        });
    }
    if rng.random_bool(0.3) {
        schema.push(PropertyDef {
            name: "label".into(),
            datatype: Datatype::Text,
            unit: String::new(),
            description: String::new(),
        });
        values.push(ColumnValues::Text(
            (0..rows).map(|_| TEXT_POOL.choose(rng).unwrap().to_string()).collect(),
        ));
    }
    let ids = (0..rows).map(|r| format!("r{r}")).collect();
    Dataset::from_values("random", schema, ids, values, None).unwrap()
}

fn random_real(rng: &mut impl Rng) -> f64 {
    if rng.random_bool(0.7) {
        *REAL_POOL.choose(rng).unwrap()
    } else {
        rng.random_range(-1e3..1e3)
    }
}

fn random_number(rng: &mut impl Rng, dt: Datatype) -> Number {
    match dt {
        Datatype::Integer => Number::Integer(rng.random_range(-7..=7)),
        _ if rng.random_bool(0.3) => Number::Integer(rng.random_range(-3..=3)),
        _ => Number::Real(random_real(rng)),
    }
}

const OPS: [CmpOp; 6] = [CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge];

/// A well-typed predicate over `schema` of depth at most `max_depth`.
pub fn random_predicate(rng: &mut impl Rng, schema: &[PropertyDef], max_depth: usize) -> ConstraintExpr {
    if max_depth <= 1 || rng.random_bool(0.35) {
        let p = schema.choose(rng).unwrap();
        return match p.datatype {
            Datatype::Text => ConstraintExpr::Comparison {
                property: p.name.clone(),
                op: if rng.random_bool(0.5) { CmpOp::Eq } else { CmpOp::Ne },
                literal: Literal::Text(TEXT_POOL.choose(rng).unwrap().to_string()),
            },
            dt if rng.random_bool(0.25) => ConstraintExpr::Between {
                property: p.name.clone(),
                low: random_number(rng, dt),
                high: random_number(rng, dt),
            },
            dt => ConstraintExpr::Comparison {
                property: p.name.clone(),
                op: *OPS.choose(rng).unwrap(),
                literal: Literal::Number(random_number(rng, dt)),
            },
        };
    }
    match rng.random_range(0..3) {
        0 => ConstraintExpr::Not(Box::new(random_predicate(rng, schema, max_depth - 1))),
        k => {
            let n = rng.random_range(2..=3);
            let parts = (0..n).map(|_| random_predicate(rng, schema, max_depth - 1)).collect();
            if k == 1 {
                ConstraintExpr::And(parts)
            } else {
                ConstraintExpr::Or(parts)
            }
        }
    }
}

/// Brute-force truth of `expr` for one row, written directly against the
/// stored values rather than through the library's evaluator.
pub fn oracle(expr: &ConstraintExpr, d: &Dataset, row: usize) -> bool {
    let value = |name: &str| d.value(row, d.property_index(name).unwrap());
    let num = |n: &Number| match *n {
        Number::Integer(i) => i as f64,
        Number::Real(r) => r,
    };
    let holds = |op: CmpOp, ord: Option<std::cmp::Ordering>| {
        use std::cmp::Ordering::*;
        match (op, ord) {
            (_, None) => false,
            (CmpOp::Eq, Some(o)) => o == Equal,
            (CmpOp::Ne, Some(o)) => o != Equal,
            (CmpOp::Lt, Some(o)) => o == Less,
            (CmpOp::Le, Some(o)) => o != Greater,
            (CmpOp::Gt, Some(o)) => o == Greater,
            (CmpOp::Ge, Some(o)) => o != Less,
        }
    };
    match expr {
        ConstraintExpr::Comparison { property, op, literal } => match (value(property), literal) {
            (Scalar::Real(v), Literal::Number(n)) => holds(*op, v.partial_cmp(&num(n))),
            (Scalar::Integer(v), Literal::Number(Number::Integer(n))) => holds(*op, Some(v.cmp(n))),
            (Scalar::Text(v), Literal::Text(t)) => holds(*op, Some(v.as_str().cmp(t.as_str()))),
            other => panic!("ill-typed predicate leaf {other:?}"),
        },
        ConstraintExpr::Between { property, low, high } => match (value(property), low, high) {
            (Scalar::Real(v), lo, hi) => num(lo) <= v && v <= num(hi),
            (Scalar::Integer(v), Number::Integer(lo), Number::Integer(hi)) => *lo <= v && v <= *hi,
            other => panic!("ill-typed BETWEEN {other:?}"),
        },
        ConstraintExpr::Not(e) => !oracle(e, d, row),
        ConstraintExpr::And(es) => es.iter().all(|e| oracle(e, d, row)),
        ConstraintExpr::Or(es) => es.iter().any(|e| oracle(e, d, row)),
    }
}

pub fn oracle_rows(expr: &ConstraintExpr, d: &Dataset) -> Vec<usize> {
    (0..d.row_count()).filter(|&r| oracle(expr, d, r)).collect()
}

// ---------------------------------------------------------------------------
// HTTP

pub struct Reply {
    pub status: u16,
    pub content_type: String,
    pub body: Vec<u8>,
}

impl Reply {
    pub fn text(&self) -> &str {
        std::str::from_utf8(&self.body).unwrap()
    }

    pub fn json(&self) -> serde_json::Value {
        serde_json::from_slice(&self.body).unwrap()
    }

    /// Error code of an ErrorDocument body; panics on anything else.
    pub fn error_code(&self) -> String {
        let doc: simdal_core::service::ErrorDocument = serde_json::from_slice(&self.body)
            .unwrap_or_else(|e| panic!("not an error document ({e}): {}", self.text()));
        assert!(
            simdal_core::service::ErrorCode::parse(&doc.code).is_some(),
            "code {} outside the fixed set",
            doc.code
        );
        doc.code
    }
}

pub async fn request(state: &Arc<ServiceState>, method: &str, uri: &str) -> Reply {
    use tower::ServiceExt;
    let req = axum::http::Request::builder()
        .method(method)
        .uri(uri)
        .body(axum::body::Body::empty())
        .unwrap();
    let resp = simdal_core::service::router(Arc::clone(state)).oneshot(req).await.unwrap();
    let status = resp.status().as_u16();
    let content_type = resp
        .headers()
        .get(axum::http::header::CONTENT_TYPE)
        .map(|v| v.to_str().unwrap().to_owned())
        .unwrap_or_default();
    let body = axum::body::to_bytes(resp.into_body(), usize::MAX).await.unwrap().to_vec();
    Reply {
        status,
        content_type,
        body,
    }
}

pub async fn get(state: &Arc<ServiceState>, uri: &str) -> Reply {
    request(state, "GET", uri).await
}

/// RFC 3986 query-value encoding: only unreserved characters stay literal.
pub fn encode(s: &str) -> String {
    const SET: &percent_encoding::AsciiSet = &percent_encoding::NON_ALPHANUMERIC
        .remove(b'-')
        .remove(b'.')
        .remove(b'_')
        .remove(b'~');
    percent_encoding::utf8_percent_encode(s, SET).to_string()
}

/// Object ids from a CSV cutout body.
pub fn csv_ids(body: &str) -> Vec<String> {
    body.lines().skip(1).map(|l| l.split(',').next().unwrap().to_owned()).collect()
}
