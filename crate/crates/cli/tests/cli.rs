use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;

use serde_json::Value;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Run {
    fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("{e}: {}", self.stdout))
    }

    fn error(&self) -> Value {
        serde_json::from_str(&self.stderr).unwrap_or_else(|e| panic!("{e}: {}", self.stderr))
    }
}

fn galprod(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_galprod"))
        .args(args)
        .current_dir(root())
        .env_remove("GALPROD_CACHE_DIR")
        .env_remove("GALPROD_LMFDB_URL")
        .output()
        .unwrap();
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn validate(schema: &str, doc: &Value) {
    let path = root().join("schemas").join(format!("{schema}.schema.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let v = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = v.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{}: {errors:?}", path.display());
}

/// Minimal stand-in for the curve database: serves `fixtures/lmfdb/<label>.json`
/// and an empty result for anything else. Counts connections.
struct FixtureServer {
    url: String,
    hits: Arc<AtomicUsize>,
}

fn fixture_server() -> FixtureServer {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let hits = Arc::new(AtomicUsize::new(0));
    let counter = hits.clone();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            counter.fetch_add(1, Ordering::SeqCst);
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request = String::new();
            reader.read_line(&mut request).unwrap();
            let mut line = String::new();
            while reader.read_line(&mut line).unwrap() > 2 {
                line.clear();
            }
            let label = request
                .split_whitespace()
                .nth(1)
                .and_then(|target| target.split("lmfdb_label=").nth(1))
                .map(|rest| rest.split('&').next().unwrap().to_string())
                .unwrap_or_default();
            let file = root().join("fixtures/lmfdb").join(format!("{label}.json"));
            let body = std::fs::read_to_string(file).unwrap_or_else(|_| r#"{"data": []}"#.to_string());
            let _ = write!(
                stream,
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
        }
    });
    FixtureServer { url, hits }
}

fn warm_cache(server: &FixtureServer, dir: &Path) {
    let cache = dir.to_str().unwrap();
    let r = galprod(&["fetch", "--label", "208.c2", "--label", "988.c1", "--cache-dir", cache, "--lmfdb-url", &server.url]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    validate("fetch", &r.json());
}

#[test]
fn ap_table_matches_example() {
    let r = galprod(&["ap", "--curve", "fixtures/curves/208.c2.json", "--pmax", "20"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = r.json();
    validate("ap", &doc);
    let records = doc["records"].as_array().unwrap();
    let p17 = records.iter().find(|x| x["p"] == 17).unwrap();
    assert_eq!(p17["ap"], 6);
    assert_eq!(p17["status"], "good");
    assert_eq!(records.last().unwrap()["p"], 19);
}

#[test]
fn inline_curve_and_torsion_dims() {
    let r = galprod(&["torsion-dims", "--curve", r#"{"ainvs": [0, 0, 0, 1, 10], "conductor": "208"}"#, "--pmax", "80"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = r.json();
    validate("torsion-dims", &doc);
    let p73 = doc["records"].as_array().unwrap().iter().find(|x| x["p"] == 73).unwrap();
    assert_eq!((p73["dim2"].clone(), p73["dim3"].clone()), (2.into(), 1.into()));
}

#[test]
fn fetch_then_offline_sieve_without_network() {
    let server = fixture_server();
    let dir = tempfile::tempdir().unwrap();
    warm_cache(&server, dir.path());
    assert_eq!(server.hits.load(Ordering::SeqCst), 2);
    let cached: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("988.c1")).unwrap()).unwrap();
    validate("cache-entry", &cached);
    assert_eq!(cached["payload"]["conductor"], "988");

    let cache = dir.path().to_str().unwrap();
    let args = [
        "sieve", "--input", "fixtures/example_pair.json", "--offline", "--cache-dir", cache, "--lmfdb-url", &server.url,
    ];
    let first = galprod(&args);
    assert_eq!(first.code, 0, "{}", first.stderr);
    let doc = first.json();
    validate("sieve", &doc);
    let set: Vec<(u64, String)> = doc["product_set"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| (e["ell"].as_u64().unwrap(), e["tag"].as_str().unwrap().to_string()))
        .collect();
    assert_eq!(set, vec![(2, "inherited".to_string()), (13, "candidate".to_string())]);
    assert_eq!(doc["pairs"][0]["verdicts"]["3"]["verdict"], "ProvedSurjective");

    let second = galprod(&args);
    assert_eq!(first.stdout, second.stdout);
    // offline runs never connected
    assert_eq!(server.hits.load(Ordering::SeqCst), 2);
}

#[test]
fn offline_cache_miss_makes_no_connection() {
    let server = fixture_server();
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap();
    let r = galprod(&["ap", "--label", "11.a2", "--offline", "--cache-dir", cache, "--lmfdb-url", &server.url]);
    assert_eq!(r.code, 1);
    let err = r.error();
    validate("error", &err);
    assert_eq!(err["error"]["kind"], "cache_miss");
    assert_eq!(server.hits.load(Ordering::SeqCst), 0);
}

#[test]
fn unknown_label_reports_not_found() {
    let server = fixture_server();
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap();
    let r = galprod(&["ap", "--label", "nosuch.z9", "--cache-dir", cache, "--lmfdb-url", &server.url]);
    assert_eq!(r.code, 1);
    let err = r.error();
    validate("error", &err);
    assert_eq!(err["error"]["kind"], "not_found");
    assert!(err["error"]["message"].as_str().unwrap().contains("nosuch.z9"));
    assert!(!dir.path().join("nosuch.z9").exists());
}

#[test]
fn unreachable_database_is_a_network_error() {
    // bind then drop, so the port is very likely closed
    let url = {
        let l = TcpListener::bind("127.0.0.1:0").unwrap();
        format!("http://{}", l.local_addr().unwrap())
    };
    let dir = tempfile::tempdir().unwrap();
    let r = galprod(&["fetch", "--label", "208.c2", "--cache-dir", dir.path().to_str().unwrap(), "--lmfdb-url", &url]);
    assert_eq!(r.code, 1);
    assert_eq!(r.error()["error"]["kind"], "network_error");
}

#[test]
fn cache_dir_from_environment() {
    let server = fixture_server();
    let dir = tempfile::tempdir().unwrap();
    warm_cache(&server, dir.path());
    let out = Command::new(env!("CARGO_BIN_EXE_galprod"))
        .args(["ap", "--label", "988.c1", "--offline", "--pmax", "30"])
        .env("GALPROD_CACHE_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["curve"]["conductor"], "988");
    let p17 = doc["records"].as_array().unwrap().iter().find(|x| x["p"] == 17).unwrap().clone();
    assert_eq!(p17["ap"], -7);
}

#[test]
fn bounds_validate_and_are_stable() {
    let cases: [&[&str]; 8] = [
        &["bound", "mw20", "--conductor", "37"],
        &["bound", "faltings", "--g", "2", "--n1", "1", "--n2", "1"],
        &["bound", "product-av", "--g", "1", "--conductors", "208,988"],
        &["bound", "product-ec", "--conductors", "208,988"],
        &["bound", "product-ec", "--conductors", "208,988", "--exact-constant"],
        &["bound", "pair", "--g", "1", "--b", "100", "--c1", "3"],
        &["bound", "bach-sorenson", "--log-dl", "10", "--degree-lk", "48"],
        &["bound", "log-disc", "--degree-lk", "48", "--degree-lq", "48", "--rad", "1482"],
    ];
    for args in cases {
        let a = galprod(args);
        assert_eq!(a.code, 0, "{args:?}: {}", a.stderr);
        validate("bound", &a.json());
        assert_eq!(a.stdout, galprod(args).stdout, "{args:?}");
    }
    let av = galprod(cases[2]).json();
    let exact = galprod(cases[4]).json();
    assert_eq!(av["value"], exact["value"]);
    assert_eq!(galprod(cases[3]).json()["value"], "36421776966.9788");
}

#[test]
fn precision_flag_widens_working_digits() {
    let r = galprod(&["bound", "mw20", "--conductor", "1", "--precision", "80"]);
    let doc = r.json();
    assert_eq!(doc["precision"], 80);
    assert_eq!(doc["value"], "8894.95715407120");
    assert_eq!(galprod(&["bound", "mw20", "--conductor", "1", "--precision", "3"]).code, 1);
}

#[test]
fn verify_commands_validate() {
    for args in [
        &["verify", "smallprimes", "--ell", "2"][..],
        &["verify", "ordrad"],
        &["verify", "orderdelta", "--ells", "3"],
        &["verify", "propclass", "--trials", "60", "--seed", "9"],
        &["verify", "propclass", "--trials", "60", "--seed", "9", "--mode", "diagonal"],
    ] {
        let r = galprod(args);
        assert_eq!(r.code, 0, "{args:?}: {}", r.stderr);
        let doc = r.json();
        validate("verify", &doc);
        assert_eq!(doc["violations"], Value::Array(vec![]));
        assert!(doc["elapsed_ms"].is_null());
        assert_eq!(r.stdout, galprod(args).stdout, "{args:?}");
    }
    let timed = galprod(&["verify", "ordrad", "--ells", "5", "--timing"]).json();
    assert!(timed["elapsed_ms"].is_u64());
    let sp = galprod(&["verify", "smallprimes", "--ell", "2"]).json();
    assert_eq!(sp["surjective_count"], 8);
}

#[test]
fn seeds_change_sampling() {
    let a = galprod(&["verify", "propclass", "--trials", "40", "--seed", "1"]).json();
    let b = galprod(&["verify", "propclass", "--trials", "40", "--seed", "2"]).json();
    assert_eq!(a["parameters"]["seed"], 1);
    assert_ne!(a["parameters"], b["parameters"]);
}

#[test]
fn exit_codes() {
    assert_eq!(galprod(&[]).code, 2);
    assert_eq!(galprod(&["ap"]).code, 2);
    assert_eq!(galprod(&["verify", "smallprimes", "--ell", "5"]).code, 2);
    assert_eq!(galprod(&["bound", "mw20", "--conductor", "x"]).code, 1);
    let singular = galprod(&["ap", "--curve", r#"{"ainvs": [0, 0, 0, 0, 0]}"#]);
    assert_eq!(singular.code, 1);
    assert_eq!(singular.error()["error"]["kind"], "singular_curve");
    let missing = galprod(&["sieve", "--input", "does/not/exist.json"]);
    assert_eq!(missing.code, 1);
    assert_eq!(missing.error()["error"]["kind"], "io_error");
    let help = galprod(&["--help"]);
    assert_eq!(help.code, 0);
    assert!(help.stdout.contains("sieve"));
}

#[test]
fn version_lists_defaults() {
    let r = galprod(&["--version"]);
    assert_eq!(r.code, 0);
    let bs = galprod_core::BSConstants::default();
    for needle in [
        format!("galprod {}", env!("CARGO_PKG_VERSION")),
        format!("pmax={}", galprod_core::sieve::DEFAULT_PMAX),
        format!("ell_ceiling={}", galprod_core::sieve::DEFAULT_ELL_CEILING),
        format!("precision={}", galprod_core::bounds::MIN_WORKING_DIGITS),
        format!("reported_digits={}", galprod_core::bounds::REPORTED_DIGITS),
        format!("a={} b={} c={}", bs.a_tilde, bs.b_tilde, bs.c_tilde),
    ] {
        assert!(r.stdout.contains(&needle), "{needle} not in {}", r.stdout);
    }
}
