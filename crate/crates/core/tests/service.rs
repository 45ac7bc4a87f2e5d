mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use common::{csv_ids, encode, get, request};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use simdal_core::service::{serve, ServiceState, JSON, XML};
use simdal_core::simdm::SNAPSHOT_LABEL;

fn rt() -> tokio::runtime::Runtime {
    tokio::runtime::Builder::new_multi_thread().enable_all().build().unwrap()
}

#[tokio::test]
async fn vosi_documents() {
    let (_tmp, cat) = common::mini_catalog();
    let st = common::state(cat, true);

    let avail = get(&st, "/availability").await;
    assert_eq!(avail.status, 200);
    assert_eq!(avail.content_type, XML);
    assert!(avail.text().contains("<available>true</available>"));
    roxmltree::Document::parse(avail.text()).unwrap();

    let caps = get(&st, "/capabilities").await;
    assert_eq!(caps.status, 200);
    assert_eq!(caps.content_type, XML);
    let doc = roxmltree::Document::parse(caps.text()).unwrap();
    let found: Vec<_> = doc.descendants().filter(|n| n.has_tag_name("capability")).collect();
    assert_eq!(found.len(), 4);
    let urls: Vec<_> = doc
        .descendants()
        .filter(|n| n.has_tag_name("accessURL"))
        .map(|n| n.text().unwrap().to_owned())
        .collect();
    assert!(urls.contains(&format!("{}/datasets", common::BASE_URL)), "{urls:?}");
    assert_eq!(get(&st, "/capabilities").await.body, caps.body);

    let tables = get(&st, "/tables").await;
    assert_eq!(tables.content_type, XML);
    let doc = roxmltree::Document::parse(tables.text()).unwrap();
    let names: Vec<_> = doc
        .descendants()
        .filter(|n| n.has_tag_name("table"))
        .map(|t| t.children().find(|c| c.has_tag_name("name")).unwrap().text().unwrap().to_owned())
        .collect();
    assert_eq!(names, ["sed_models", "snapshots"]);
    let snap = doc
        .descendants()
        .filter(|n| n.has_tag_name("table"))
        .nth(1)
        .unwrap();
    assert!(snap
        .descendants()
        .any(|c| c.has_tag_name("column") && c.children().any(|n| n.text() == Some("clump_mass"))));
    assert_eq!(get(&st, "/tables").await.body, tables.body);
}

#[tokio::test]
async fn unavailable_service_gates_data_routes() {
    let (_tmp, cat) = common::mini_catalog();
    let st = common::state(cat, false);
    let avail = get(&st, "/availability").await;
    assert_eq!(avail.status, 200);
    assert!(avail.text().contains("<available>false</available>"));
    for uri in ["/capabilities", "/tables"] {
        assert_eq!(get(&st, uri).await.status, 200, "{uri}");
    }
    for uri in [
        "/datasets",
        "/datasets/sed_models",
        "/datasets/nope",
        "/datasets/sed_models/objects/m1",
        "/datasets/sed_models/objects/m1/vector",
        "/datasets/sed_models/cutout",
        "/datasets/sed_models/rawdata",
        "/datasets/sed_models/rawdata/vectors",
        "/relationships/SnapshotSedModel?source=s1",
    ] {
        let r = get(&st, uri).await;
        assert_eq!(r.status, 503, "{uri}");
        assert_eq!(r.error_code(), "unavailable", "{uri}");
    }
}

#[tokio::test]
async fn dataset_list_and_detail() {
    let (_tmp, cat) = common::mini_catalog();
    let st = common::state(cat, true);
    let list = get(&st, "/datasets").await;
    assert_eq!((list.status, list.content_type.as_str()), (200, JSON));
    let v = list.json();
    let entries = v.as_array().unwrap();
    assert_eq!(entries.len(), 2);
    assert_eq!(entries[0]["id"], "sed_models");
    assert_eq!(entries[0]["object_count"], 3);
    assert_eq!(entries[0]["links"]["cutout"], format!("{}/datasets/sed_models/cutout", common::BASE_URL));
    assert!(entries[1]["links"].get("vectors").is_none());
    assert!(entries
        .iter()
        .all(|e| e["utype"] == "SimDM:/resource/experiment/OutputDataset"));
    assert!(list.text().contains("\"utype\": \"SimDM:/resource/experiment/OutputDataset\""));

    let snaps = get(&st, "/datasets/snapshots").await;
    assert_eq!(snaps.status, 200);
    let v = snaps.json();
    assert_eq!(v["object_type"]["label"], SNAPSHOT_LABEL);
    assert!(v["object_type"]["label"].as_str().unwrap().ends_with("DataObjectTypes.html#Snapshot"));
    assert_eq!(v["object_type"]["properties"][0]["name"], "clump_mass");
    assert_eq!(v["dataset"]["id"], "snapshots");

    let models = get(&st, "/datasets/sed_models").await.json();
    assert_eq!(models["relationships"], serde_json::json!(["SnapshotSedModel"]));

    let nope = get(&st, "/datasets/nope").await;
    assert_eq!(nope.status, 404);
    assert_eq!(nope.error_code(), "unknown_dataset");
}

#[tokio::test]
async fn objects_and_vectors() {
    let (_tmp, cat) = common::mini_catalog();
    let st = common::state(cat, true);
    let s1 = get(&st, "/datasets/snapshots/objects/s1").await;
    assert_eq!(s1.status, 200);
    let v = s1.json();
    assert_eq!(v["utype"], "SimDM:/resource/experiment/DataObject");
    assert_eq!(v["values"][0]["name"], "clump_mass");
    assert_eq!(v["values"][0]["value"].as_f64(), Some(100.0));
    assert_eq!(v["values"][0]["utype"], "SimDM:/resource/experiment/PropertyValue");
    assert!(s1.text().contains("\"value\": 100.0"));
    assert!(v.get("vector").is_none());

    let m1 = get(&st, "/datasets/sed_models/objects/m1").await.json();
    assert_eq!(
        m1["vector"],
        format!("{}/datasets/sed_models/objects/m1/vector", common::BASE_URL)
    );
    let names: Vec<_> = m1["values"].as_array().unwrap().iter().map(|x| x["name"].clone()).collect();
    assert_eq!(names, ["clump_mass", "time", "n_stars", "family"]);

    let wrong = get(&st, "/datasets/sed_models/objects/s1").await;
    assert_eq!(wrong.status, 404);
    assert_eq!(wrong.error_code(), "unknown_object");

    let vec_csv = get(&st, "/datasets/sed_models/objects/m1/vector").await;
    assert_eq!(vec_csv.content_type, "text/csv; charset=utf-8");
    assert_eq!(vec_csv.text(), "wavelength,flux\n1.0,0.5\n10.0,2.0\n100.0,8.0\n1000.0,1.0\n");
    let vec_json = get(&st, "/datasets/sed_models/objects/m1/vector?FORMAT=json").await.json();
    assert_eq!(vec_json[3]["flux"].as_f64(), Some(1.0));
    let none = get(&st, "/datasets/snapshots/objects/s1/vector").await;
    assert_eq!(none.status, 404);
    none.error_code();
}

#[tokio::test]
async fn cutouts() {
    let (_tmp, cat) = common::mini_catalog();
    let st = common::state(cat, true);
    let r = get(&st, "/datasets/sed_models/cutout?WHERE=clump_mass%3E%3D100%20AND%20time%3C1e5").await;
    assert_eq!(r.status, 200);
    assert_eq!(
        r.text(),
        "id,clump_mass,time,n_stars,family\nm1,100.0,10000.0,12,alpha\nm2,500.0,50000.0,40,beta\n"
    );
    let r = get(&st, "/datasets/sed_models/cutout?LIMIT=1").await;
    assert_eq!(csv_ids(r.text()), ["m1"]);
    let r = get(&st, "/datasets/sed_models/cutout?WHERE=&FIELDS=family,n_stars&OFFSET=1&FORMAT=json").await;
    assert_eq!(r.content_type, JSON);
    assert_eq!(
        r.text(),
        "[\n  {\"id\":\"m2\",\"family\":\"beta\",\"n_stars\":40},\n  {\"id\":\"m3\",\"family\":\"alpha\",\"n_stars\":85}\n]\n"
    );
    let r = get(&st, "/datasets/sed_models/cutout?WHERE=family%20%3D%20%27alpha%27%20OR%20NOT%20n_stars%20BETWEEN%200%20AND%2050").await;
    assert_eq!(csv_ids(r.text()), ["m1", "m3"]);

    let bogus = get(&st, "/datasets/sed_models/cutout?WHERE=bogus%20syntax").await;
    assert_eq!(bogus.status, 400);
    assert_eq!(bogus.error_code(), "invalid_query");
    assert_eq!(bogus.json()["offset"], 6);

    for (query, status, code) in [
        ("WHERE=mass%3E1", 400, "unknown_property"),
        ("WHERE=n_stars%3D1.5", 400, "type_error"),
        ("WHERE=family%3E%27a%27", 400, "type_error"),
        ("WHERE=clump_mass%3E", 400, "invalid_query"),
        ("WHERE=clump_mass+%3E+1", 400, "invalid_query"),
        ("FIELDS=nope", 400, "unknown_property"),
        ("LIMIT=0", 400, "bad_parameter"),
        ("OFFSET=x", 400, "bad_parameter"),
        ("FORMAT=votable", 400, "bad_parameter"),
        ("LIMIT=1&LIMIT=2", 400, "bad_parameter"),
        ("WHERE=%FF", 400, "bad_parameter"),
    ] {
        let r = get(&st, &format!("/datasets/sed_models/cutout?{query}")).await;
        assert_eq!(r.status, status, "{query}: {}", r.text());
        assert_eq!(r.error_code(), code, "{query}");
    }
    let r = get(&st, "/datasets/nope/cutout").await;
    assert_eq!((r.status, r.error_code().as_str()), (404, "unknown_dataset"));
}

#[tokio::test]
async fn row_cap_applies_to_cutouts_not_rawdata() {
    let (_tmp, cat) = common::mini_catalog();
    let st = Arc::new(
        ServiceState::new(
            Arc::new(cat),
            simdal_core::vo::ServiceConfig::new(common::BASE_URL),
            true,
        )
        .unwrap()
        .with_row_cap(2),
    );
    let r = get(&st, "/datasets/sed_models/cutout").await;
    assert_eq!((r.status, r.error_code().as_str()), (400, "bad_parameter"));
    assert_eq!(get(&st, "/datasets/sed_models/cutout?LIMIT=2").await.status, 200);
    assert_eq!(get(&st, "/datasets/sed_models/rawdata").await.status, 200);
}

#[tokio::test]
async fn rawdata_matches_unfiltered_cutout() {
    let (_tmp, cat) = common::mini_catalog();
    let st = common::state(cat, true);
    for fmt in ["csv", "json"] {
        let raw = get(&st, &format!("/datasets/sed_models/rawdata?FORMAT={fmt}")).await;
        let cut = get(&st, &format!("/datasets/sed_models/cutout?FORMAT={fmt}")).await;
        assert_eq!(raw.status, 200);
        assert_eq!(raw.body, cut.body, "{fmt}");
        assert_eq!(raw.content_type, cut.content_type);
    }
    let raw = get(&st, "/datasets/sed_models/rawdata").await;
    assert_eq!(raw.text().lines().count(), 4);
    let vectors = get(&st, "/datasets/sed_models/rawdata/vectors").await;
    let m1: Vec<f64> = vectors
        .text()
        .lines()
        .skip(1)
        .filter(|l| l.starts_with("m1,"))
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(m1.len(), 4);
    assert!(m1.windows(2).all(|w| w[0] < w[1]));
    assert!(vectors.text().starts_with("id,wavelength,flux\n"));
    let r = get(&st, "/datasets/snapshots/rawdata/vectors").await;
    assert_eq!(r.status, 404);
    r.error_code();
    let r = get(&st, "/datasets/sed_models/rawdata/vectors?FORMAT=json").await;
    assert_eq!((r.status, r.error_code().as_str()), (400, "bad_parameter"));
}

#[tokio::test]
async fn relationships() {
    let (_tmp, cat) = common::mini_catalog();
    let st = common::state(cat, true);
    let r = get(&st, "/relationships/SnapshotSedModel?source=s1").await;
    assert_eq!(r.status, 200);
    let v = r.json();
    assert_eq!(v[0]["id"], "m1");
    assert_eq!(v[0]["link"], format!("{}/datasets/sed_models/objects/m1", common::BASE_URL));
    assert_eq!(get(&st, "/relationships/SnapshotSedModel?source=s2").await.text(), "[]\n");
    for (uri, status, code) in [
        ("/relationships/Nope?source=s1", 404, "unknown_relationship"),
        ("/relationships/SnapshotSedModel?source=zz", 404, "unknown_object"),
        ("/relationships/SnapshotSedModel", 400, "bad_parameter"),
    ] {
        let r = get(&st, uri).await;
        assert_eq!((r.status, r.error_code().as_str()), (status, code), "{uri}");
    }
}

#[tokio::test]
async fn every_error_is_an_error_document() {
    let (_tmp, cat) = common::mini_catalog();
    let st = common::state(cat, true);
    for uri in [
        "/nowhere",
        "/datasets/sed_models/objects",
        "/datasets/sed_models/objects/m1/extra",
        "/datasets/%FF",
        "/datasets/sed_models/cutout?WHERE=(((",
        "/datasets/sed_models/cutout?WHERE=%27open",
    ] {
        let r = get(&st, uri).await;
        assert!(r.status >= 400, "{uri}");
        assert_eq!(r.content_type, JSON, "{uri}");
        r.error_code();
    }
    let r = request(&st, "POST", "/datasets").await;
    assert_eq!(r.status, 405);
    r.error_code();
}

fn snapshot_dir(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_owned()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.display().to_string(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[tokio::test]
async fn requests_do_not_touch_the_catalog() {
    let (_tmp, cat) = common::mini_catalog();
    let root = cat.root().to_owned();
    let before = snapshot_dir(&root);
    let st = common::state(cat, true);
    for uri in [
        "/datasets",
        "/datasets/sed_models/cutout?WHERE=n_stars%3E1",
        "/datasets/sed_models/rawdata",
        "/datasets/sed_models/rawdata/vectors",
        "/relationships/SnapshotSedModel?source=s1",
        "/tables",
    ] {
        get(&st, uri).await;
    }
    assert_eq!(snapshot_dir(&root), before);
}

#[test]
fn serves_over_tcp() {
    let (_tmp, cat) = common::mini_catalog();
    let st = common::state(cat, true);
    rt().block_on(async move {
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let addr = listener.local_addr().unwrap();
        let (tx, rx) = tokio::sync::oneshot::channel::<()>();
        let server = tokio::spawn(serve(listener, st, async {
            let _ = rx.await;
        }));
        let client = reqwest::Client::new();
        let base = format!("http://{addr}");
        let avail = client.get(format!("{base}/availability")).send().await.unwrap();
        assert_eq!(avail.status().as_u16(), 200);
        assert_eq!(avail.headers()["content-type"], XML);
        let body = client
            .get(format!("{base}/datasets/sed_models/cutout?WHERE=clump_mass%3E%3D100%20AND%20time%3C1e5"))
            .send()
            .await
            .unwrap()
            .text()
            .await
            .unwrap();
        assert_eq!(csv_ids(&body), ["m1", "m2"]);
        let raw = client
            .get(format!("{base}/datasets/sed_models/rawdata/vectors"))
            .send()
            .await
            .unwrap()
            .text()
            .await
            .unwrap();
        assert_eq!(raw.lines().count(), 13);
        tx.send(()).unwrap();
        server.await.unwrap().unwrap();
    });
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cutout_equals_oracle_and_pages_concatenate(seed in any::<u64>(), page in 1usize..40) {
        let (_tmp, cat) = common::grid_catalog(150, 11);
        let st = common::state(cat, true);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ds = st.catalog.dataset("sed_models").unwrap();
        let expr = common::random_predicate(&mut rng, ds.schema(), 4);
        let expected: Vec<String> = common::oracle_rows(&expr, ds).into_iter().map(|r| ds.id_of(r).to_owned()).collect();
        let q = encode(&expr.to_string());
        rt().block_on(async {
            let whole = get(&st, &format!("/datasets/sed_models/cutout?WHERE={q}")).await;
            prop_assert_eq!(whole.status, 200);
            prop_assert_eq!(csv_ids(whole.text()), expected.clone());
            let mut pages = String::new();
            let mut header = None;
            for offset in (0..=expected.len()).step_by(page) {
                let r = get(&st, &format!("/datasets/sed_models/cutout?WHERE={q}&LIMIT={page}&OFFSET={offset}")).await;
                let (h, rows) = r.text().split_once('\n').unwrap();
                header.get_or_insert(h.to_owned());
                pages.push_str(rows);
            }
            prop_assert_eq!(format!("{}\n{pages}", header.unwrap()), whole.text());
            Ok(())
        })?;
    }
}
