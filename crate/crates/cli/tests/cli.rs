use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};

use tempfile::TempDir;

fn forge() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_simdal-forge"));
    c.env_remove("SIMDAL_FORGE_BASE_URL");
    c
}

fn run(args: &[&str]) -> Output {
    forge().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn mini_spec() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/mini/spec.json")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn mini_catalog(tmp: &TempDir) -> PathBuf {
    let out = tmp.path().join("cat");
    let o = run(&["ingest", s(&mini_spec()), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

#[test]
fn ingest_reports_rows_and_refuses_overwrite() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("cat");
    let o = run(&["ingest", s(&mini_spec()), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("sed_models: 3 rows"), "{}", stdout(&o));
    let again = run(&["ingest", s(&mini_spec()), "--out", s(&out)]);
    assert_eq!(again.status.code(), Some(1));
    assert!(stderr(&again).contains("OutputNotEmpty"), "{}", stderr(&again));
}

#[test]
fn ingest_errors_name_code_and_path() {
    let tmp = TempDir::new().unwrap();
    let spec = fs::read_to_string(mini_spec()).unwrap().replace("links.csv", "missing_links.csv");
    let spec_path = tmp.path().join("spec.json");
    fs::write(&spec_path, spec).unwrap();
    for name in ["sed_models_schema.csv", "sed_models.csv", "seds.csv", "snapshots_schema.csv", "snapshots.csv"] {
        fs::copy(mini_spec().with_file_name(name), tmp.path().join(name)).unwrap();
    }
    let o = run(&["ingest", s(&spec_path), "--out", s(&tmp.path().join("cat"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("IoError"), "{}", stderr(&o));
    assert!(stderr(&o).contains("missing_links.csv"), "{}", stderr(&o));

    let corrupt = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/corrupt/csv_format/spec.json");
    let o = run(&["ingest", s(&corrupt), "--out", s(&tmp.path().join("c2"))]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("CsvFormatError") && err.contains("sed_models.csv:3"), "{err}");
}

#[test]
fn validate_detects_damage() {
    let tmp = TempDir::new().unwrap();
    let cat = mini_catalog(&tmp);
    let o = run(&["validate", "--catalog", s(&cat), "--verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("ok: 2 datasets"));

    let col = cat.join("datasets/sed_models/columns/clump_mass.val");
    assert!(col.is_file(), "column file layout changed");
    let bytes = fs::read(&col).unwrap();
    fs::write(&col, &bytes[..bytes.len() - 1]).unwrap();
    let o = run(&["validate", "--catalog", s(&cat), "--verify"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("CorruptCatalog"), "{}", stderr(&o));

    fs::remove_file(cat.join("manifest.json")).unwrap();
    let o = run(&["validate", "--catalog", s(&cat)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn query_outputs_rows() {
    let tmp = TempDir::new().unwrap();
    let cat = mini_catalog(&tmp);
    let q = |w: &str| run(&["query", "--catalog", s(&cat), "--dataset", "sed_models", "--where", w]);
    let o = q("clump_mass>=100 AND time<1e5");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 3);
    assert_eq!(stdout(&q("")).lines().count(), 4);
    let o = q("x>");
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("invalid_query") && stderr(&o).contains("offset 2"), "{}", stderr(&o));
    let o = q("nope > 1");
    assert!(stderr(&o).contains("unknown_property"));
    let o = run(&["query", "--catalog", s(&cat), "--dataset", "nope"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown_dataset"));
    let o = run(&[
        "query", "--catalog", s(&cat), "--dataset", "sed_models", "--fields", "n_stars", "--format", "json", "--limit", "1",
    ]);
    assert_eq!(stdout(&o), "[\n  {\"id\":\"m1\",\"n_stars\":12}\n]\n");
}

#[test]
fn gen_grid_is_deterministic_and_ingests() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let o = run(&["gen-grid", "--models", "100", "--seed", "42", "--out", s(dir)]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for e in fs::read_dir(&a).unwrap() {
        let name = e.unwrap().file_name();
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name:?}");
    }
    let o = run(&["ingest", s(&a.join("spec.json")), "--out", s(&tmp.path().join("cat"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("snapshots: 10 rows"));

    let one = tmp.path().join("one");
    let o = run(&["gen-grid", "--models", "1", "--seed", "3", "--out", s(&one)]);
    assert_eq!(stdout(&o).trim_end(), format!("1 models, 1 snapshots, 1 links written to {}", one.display()));
    assert_eq!(fs::read_to_string(one.join("snapshot_links.csv")).unwrap(), "source_id,target_id\ns000001,m000001\n");

    assert_eq!(run(&["gen-grid", "--models", "0", "--out", s(&one)]).status.code(), Some(1));
    let file = tmp.path().join("file");
    fs::write(&file, "").unwrap();
    let o = run(&["gen-grid", "--models", "5", "--out", s(&file.join("sub"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("IoError"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["query", "--catalog", "x"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

struct Server {
    child: Child,
    base: String,
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn spawn_server(cat: &Path, extra: &[&str], env: Option<&str>) -> Server {
    let mut cmd = forge();
    cmd.args(["serve", "--catalog", s(cat), "--port", "0"]).args(extra);
    if let Some(url) = env {
        cmd.env("SIMDAL_FORGE_BASE_URL", url);
    }
    let mut child = cmd.stderr(Stdio::piped()).stdout(Stdio::null()).spawn().unwrap();
    let mut lines = BufReader::new(child.stderr.take().unwrap()).lines();
    let first = lines.next().unwrap().unwrap();
    let addr = first
        .strip_prefix("listening on ")
        .and_then(|r| r.split_whitespace().next())
        .unwrap_or_else(|| panic!("unexpected banner {first:?}"))
        .to_owned();
    std::thread::spawn(move || for _ in lines {});
    Server { child, base: addr }
}

async fn fetch(url: &str) -> (u16, String) {
    let r = reqwest::get(url).await.unwrap();
    (r.status().as_u16(), r.text().await.unwrap())
}

fn encode(q: &str) -> String {
    q.bytes()
        .map(|b| match b {
            b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'-' | b'.' | b'_' | b'~' => (b as char).to_string(),
            _ => format!("%{b:02X}"),
        })
        .collect()
}

#[tokio::test(flavor = "multi_thread")]
async fn serve_routes_and_availability() {
    let tmp = TempDir::new().unwrap();
    let cat = mini_catalog(&tmp);
    let up = spawn_server(&cat, &[], None);
    assert_eq!(fetch(&format!("{}/availability", up.base)).await.0, 200);
    let (st, caps) = fetch(&format!("{}/capabilities", up.base)).await;
    assert_eq!(st, 200);
    assert!(caps.contains(&format!("{}/datasets", up.base)));

    let down = spawn_server(&cat, &["--unavailable"], None);
    let (st, body) = fetch(&format!("{}/datasets", down.base)).await;
    assert_eq!(st, 503);
    assert!(body.contains("\"code\": \"unavailable\""));
    assert_eq!(fetch(&format!("{}/availability", down.base)).await.0, 200);

    let env = spawn_server(&cat, &[], Some("https://env.example/simdal"));
    let caps = fetch(&format!("{}/capabilities", env.base)).await.1;
    assert!(caps.contains("https://env.example/simdal/datasets"));
    let flag = spawn_server(&cat, &["--base-url", "https://flag.example"], Some("https://env.example/simdal"));
    let caps = fetch(&format!("{}/capabilities", flag.base)).await.1;
    assert!(caps.contains("https://flag.example/datasets") && !caps.contains("env.example"));
}

#[test]
fn serve_rejects_invalid_catalog() {
    let tmp = TempDir::new().unwrap();
    let o = run(&["serve", "--catalog", s(tmp.path()), "--port", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!stderr(&o).contains("listening"));
}

#[tokio::test(flavor = "multi_thread")]
async fn query_matches_service_cutout() {
    let tmp = TempDir::new().unwrap();
    let grid = tmp.path().join("grid");
    assert!(run(&["gen-grid", "--models", "200", "--seed", "7", "--out", s(&grid)]).status.success());
    let cat = tmp.path().join("cat");
    assert!(run(&["ingest", s(&grid.join("spec.json")), "--out", s(&cat)]).status.success());
    let server = spawn_server(&cat, &[], None);

    let predicates = [
        "clump_mass >= 5000",
        "clump_mass BETWEEN 1000 AND 2000 AND time < 5e5",
        "n_stars > 2500 OR t_dust < 12",
        "NOT (sfe < 0.25)",
        "lbol >= 50000 AND NOT inclination BETWEEN 30 AND 60",
        "n_stars = 10",
        "clump_radius < 0.2 OR clump_radius > 1.9",
        "time > 1e6",
        "(clump_mass < 500 OR lbol > 90000) AND n_stars != 100",
        "",
    ];
    for (i, w) in predicates.iter().enumerate() {
        for format in ["csv", "json"] {
            let fields = if i % 3 == 0 { "lbol,clump_mass" } else { "" };
            let cli = run(&[
                "query", "--catalog", s(&cat), "--dataset", "sed_models", "--where", w, "--fields", fields, "--format", format,
            ]);
            assert!(cli.status.success(), "{w}: {}", stderr(&cli));
            let url = format!(
                "{}/datasets/sed_models/cutout?WHERE={}&FIELDS={}&FORMAT={format}",
                server.base,
                encode(w),
                encode(fields)
            );
            let (status, body) = fetch(&url).await;
            assert_eq!(status, 200, "{w}");
            assert_eq!(stdout(&cli), body, "{w} {format}");
        }
    }
}
