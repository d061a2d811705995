use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn data(rel: &str) -> String {
    root().join("data").join(rel).to_string_lossy().into_owned()
}

fn sosfold(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sosfold")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

const VALIDATOR: &str = r#"
import json, pathlib, sys
try:
    import jsonschema, referencing
except ImportError:
    sys.exit(77)
base = pathlib.Path(sys.argv[1])
resources = []
for p in base.glob("*.json"):
    doc = json.loads(p.read_text())
    resources.append((doc["$id"], referencing.Resource.from_contents(doc)))
registry = referencing.Registry().with_resources(resources)
schema = json.loads((base / sys.argv[2]).read_text())
cls = jsonschema.validators.validator_for(schema)
validator = cls(schema, registry=registry)
for line in pathlib.Path(sys.argv[3]).read_text().splitlines():
    if line.strip():
        validator.validate(json.loads(line))
"#;

/// Validates each JSON line of `text` against `schemas/v1/<schema>`. Skipped
/// with a message when Python's `jsonschema` is not installed.
fn validate(schema: &str, text: &str) {
    let dir = tempfile::tempdir().unwrap();
    let doc = dir.path().join("doc.jsonl");
    // one document per line
    let lines: Vec<String> = serde_json::Deserializer::from_str(text)
        .into_iter::<Value>()
        .map(|v| v.expect("valid JSON").to_string())
        .collect();
    fs::write(&doc, lines.join("\n")).unwrap();
    let out = Command::new("python3")
        .arg("-c")
        .arg(VALIDATOR)
        .arg(root().join("schemas/v1"))
        .arg(schema)
        .arg(&doc)
        .output();
    match out {
        Ok(o) if o.status.code() == Some(77) => eprintln!("skipping schema check: python jsonschema missing"),
        Ok(o) => assert!(o.status.success(), "{schema}: {}", String::from_utf8_lossy(&o.stderr)),
        Err(e) => eprintln!("skipping schema check: {e}"),
    }
}

#[test]
fn contradiction_is_refuted() {
    let out = sosfold(&["sos", "refute", "--system", &data("sos/contradiction.json"), "--degree", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["verdict"], "REFUTED");
    validate("report.json", &String::from_utf8_lossy(&out.stdout));
}

#[test]
fn certificate_file_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("cert.json");
    let out = sosfold(&[
        "sos",
        "refute",
        "--system",
        &data("sos/contradiction.json"),
        "--degree",
        "2",
        "--emit-certificate",
        cert.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&cert).unwrap();
    assert!(serde_json::from_str::<Value>(&text).is_ok());
}

#[test]
fn negative_diagonal_is_bottom() {
    let out = sosfold(&["sdp", "feas", "--input", &data("sdp/negative_1x1.json"), "--epsilon", "1/4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["verdict"], "BOTTOM");
    validate("report.json", &String::from_utf8_lossy(&out.stdout));
}

#[test]
fn unit_interval_is_top() {
    let out = sosfold(&["sdp", "feas", "--input", &data("sdp/unit_interval_1x1.json"), "--epsilon", "1/4"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["verdict"], "TOP");
    validate("report.json", &String::from_utf8_lossy(&out.stdout));
}

#[test]
fn lp_small_optimum() {
    let out = sosfold(&["lp", "solve", &data("lp/small.json")]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["verdict"], "OPTIMAL");
    assert_eq!(r["value"], "-14/5");
    validate("report.json", &String::from_utf8_lossy(&out.stdout));
}

#[test]
fn a_graph_is_not_refuted_against_itself() {
    let c6 = data("graphs/c6.json");
    let out = sosfold(&["iso", "compare", "--g", &c6, "--h", &c6, "--max-degree", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["verdict"], "NOT_REFUTABLE");
    validate("report.json", &String::from_utf8_lossy(&out.stdout));
}

#[test]
fn hexagon_and_two_triangles() {
    let (g, h) = (data("graphs/c6.json"), data("graphs/two_triangles.json"));
    let at = |k: &str| report(&sosfold(&["iso", "wl", "--g", &g, "--h", &h, "--k", k]))["verdict"].clone();
    assert_eq!(at("2"), "EQUIVALENT");
    assert_eq!(at("3"), "DISTINGUISHED");
}

#[test]
fn decimal_input_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.json");
    fs::write(&f, r#"{"J": ["a"], "M": [], "A": {}, "b": {}, "R": "1.5"}"#).unwrap();
    let out = sosfold(&["sdp", "feas", "--input", f.to_str().unwrap(), "--epsilon", "1/4"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());

    let out = sosfold(&["sdp", "feas", "--input", &data("sdp/negative_1x1.json"), "--epsilon", "0.25"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(sosfold(&["lp"]).status.code(), Some(1));
    assert_eq!(sosfold(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(sosfold(&["--help"]).status.code(), Some(0));
}

#[test]
fn missing_file_is_an_input_error() {
    let out = sosfold(&["lp", "solve", "/nonexistent/lp.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn fold_demo_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let trace = dir.path().join(name);
        let out = sosfold(&["--seed", "11", "--trace", trace.to_str().unwrap(), "fold-demo", "--size", "3"]);
        assert_eq!(out.status.code(), Some(0));
        (out.stdout, fs::read(trace).unwrap())
    };
    let (a, b) = (run("a.jsonl"), run("b.jsonl"));
    assert_eq!(a, b);
    assert!(!a.1.is_empty());
    validate("trace-record.json", &String::from_utf8_lossy(&a.1));
    validate("report.json", &String::from_utf8_lossy(&a.0));
}

#[test]
fn collapse_on_a_small_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    fs::create_dir(&corpus).unwrap();
    for name in ["iso-n3-00.json", "noniso-n5-0.json"] {
        fs::copy(data(&format!("corpus/{name}")), corpus.join(name)).unwrap();
    }
    let table = dir.path().join("table.json");
    let out = sosfold(&["iso", "collapse", "--corpus", corpus.to_str().unwrap(), "--out", table.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["verdict"], "COMPLETE");
    let text = fs::read_to_string(&table).unwrap();
    validate("collapse-report.json", &text);
    let t: Value = serde_json::from_str(&text).unwrap();
    let rows = t["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    let noniso = rows.iter().find(|r| r["pair"] == "noniso-n5-0").unwrap();
    assert_eq!(noniso["isomorphic"], false);
    assert_eq!(noniso["sos_status"][1]["status"], "REFUTED");
}

#[test]
fn input_files_match_their_schemas() {
    let pairs = [
        ("lp.json", "lp/small.json"),
        ("sdp-set.json", "sdp/negative_1x1.json"),
        ("sdp-set.json", "sdp/unit_interval_1x1.json"),
        ("poly-system.json", "sos/contradiction.json"),
        ("graph.json", "graphs/c6.json"),
        ("graph-pair.json", "corpus/noniso-n5-0.json"),
        ("collapse-report.json", "results/collapse_table.json"),
    ];
    for (schema, file) in pairs {
        validate(schema, &fs::read_to_string(data(file)).unwrap());
    }
}
