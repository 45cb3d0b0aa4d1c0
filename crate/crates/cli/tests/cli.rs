use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use jsonschema::JSONSchema;
use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nilwalk"))
}

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).to_path_buf()
}

fn data(name: &str) -> PathBuf {
    root().join("tests/data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env_remove("NILWALK_SEED").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn schema(name: &str) -> JSONSchema {
    let text = fs::read_to_string(root().join("schemas").join(format!("{name}.schema.json"))).unwrap();
    JSONSchema::compile(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn assert_valid(schema_name: &str, v: &Value) {
    let s = schema(schema_name);
    let msgs: Vec<String> = match s.validate(v) {
        Ok(()) => return,
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    panic!("{schema_name}: {msgs:?}");
}

/// CSV rows as typed JSON objects.
fn csv_rows(path: &Path) -> Vec<Value> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let headers = r.headers().unwrap().clone();
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            let mut m = serde_json::Map::new();
            for (h, v) in headers.iter().zip(rec.iter()) {
                let val = match h {
                    "N" | "samples" | "seed" => json!(v.parse::<u64>().unwrap()),
                    "mean" | "std_error" => json!(v.parse::<f64>().unwrap()),
                    _ => json!(v),
                };
                m.insert(h.to_string(), val);
            }
            Value::Object(m)
        })
        .collect()
}

fn small_config(dir: &Path, samples: u64) -> PathBuf {
    let cfg = json!({
        "experiment_id": "small",
        "group": "heisenberg3",
        "measure": {"variant": "discrete", "atoms": [[1, 0, 0], [0, 1, 0]], "weights": ["1/2", "1/2"]},
        "schedule": [2, 4, 8],
        "samples": samples,
        "seed": 11,
        "frequencies": [[0, 0, 1], [0.25, -0.5, 0.5]],
        "experiment": {"kind": "char_fn"}
    });
    let path = dir.join("small.json");
    fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

#[test]
fn validate_catalog_and_files() {
    let o = run(&["validate", "heisenberg3"]);
    assert_eq!(code(&o), 0);
    let o = run(&["validate", "ut4"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_valid("validate-report", &v);
    assert_eq!(v["oracle_agreement"]["samples"], 1000);
    assert_eq!(v["oracle_agreement"]["mismatches"], 0);

    let o = run(&["validate", data("broken.json").to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let v = stdout_json(&o);
    assert_valid("validate-report", &v);
    assert_eq!(v["algebra_valid"], false);
    assert!(v["witness"].is_string());

    assert_eq!(code(&run(&["validate", "no-such-group"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
}

#[test]
fn list_and_emit() {
    let o = run(&["list-groups"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout).to_string();
    for name in ["heisenberg3", "ut4", "free2step3"] {
        assert!(text.contains(name));
    }
    let o = run(&["emit-law", "heisenberg3"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["group"]["name"], "heisenberg3");
}

#[test]
fn verify_lemmas_exit_codes() {
    for (g, n) in [("heisenberg3", "5"), ("free2step3", "4")] {
        let o = run(&["verify-lemmas", g, "--max-n", n]);
        assert_eq!(code(&o), 0, "{g}");
        let v = stdout_json(&o);
        assert_valid("lemma-bundle", &v);
        assert_eq!(v["passed"], true);
    }
    let o = run(&["verify-lemmas", data("abelian.json").to_str().unwrap(), "--max-n", "3"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_valid("lemma-bundle", &v);
    assert!(v["reports"]
        .as_array()
        .unwrap()
        .iter()
        .any(|r| r["check"] == "single_block_nonvanishing" && r["status"] == "not_applicable"));
    assert_eq!(code(&run(&["verify-lemmas", "ut4", "--max-n", "9", "--cap", "1000"])), 3);
    assert_eq!(code(&run(&["verify-lemmas", "heisenberg3", "--max-n", "2"])), 2);
}

#[test]
fn cramer_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let rad = dir.path().join("rad.json");
    fs::write(&rad, r#"{"variant": "discrete", "atoms": [[1, 0, 0], [-1, 0, 0]], "weights": ["1/2", "1/2"]}"#).unwrap();
    let o = run(&["cramer", rad.to_str().unwrap(), "--r-max", "3"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["verdict"]["verdict"], "fails");
    assert_eq!(v["verdict"]["exact"], true);
}

#[test]
fn run_outputs_match_schemas_and_resume() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), 2000);
    let out = dir.path().join("out");
    let o = run(&["run", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_valid("run-report", &stdout_json(&o));
    assert_valid("experiment-config", &serde_json::from_str(&fs::read_to_string(&cfg).unwrap()).unwrap());
    let manifest: Value = serde_json::from_str(&fs::read_to_string(out.join("small.manifest.json")).unwrap()).unwrap();
    assert_valid("run-manifest", &manifest);
    assert_eq!(manifest["experiments"][0]["status"], "complete");
    let rows = csv_rows(&out.join("small.csv"));
    assert!(!rows.is_empty());
    for r in &rows {
        assert_valid("csv-row", r);
    }
    for n in [2, 4, 8] {
        assert!(rows.iter().any(|r| r["N"] == n));
    }

    // drop the last walk length and resume
    let full = fs::read_to_string(out.join("small.csv")).unwrap();
    let kept: Vec<&str> = full.lines().filter(|l| !l.contains(",8,")).collect();
    fs::write(out.join("small.csv"), kept.join("\n") + "\n").unwrap();
    let o = run(&["run", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap(), "--resume"]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read_to_string(out.join("small.csv")).unwrap(), full);

    // a different seed cannot resume the old rows
    let o = bin()
        .args(["run", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap(), "--resume"])
        .env("NILWALK_SEED", "12")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn seed_env_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), 5000);
    let csv_for = |sub: &str, threads: &str, seed: Option<&str>| {
        let out = dir.path().join(sub);
        let mut c = bin();
        c.args(["--threads", threads, "run", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
        match seed {
            Some(s) => c.env("NILWALK_SEED", s),
            None => c.env_remove("NILWALK_SEED"),
        };
        let o = c.output().unwrap();
        assert_eq!(code(&o), 0);
        fs::read(out.join("small.csv")).unwrap()
    };
    let a = csv_for("a", "1", None);
    assert_eq!(a, csv_for("b", "3", None));
    let c = csv_for("c", "2", Some("99"));
    assert_ne!(a, c);
    assert!(String::from_utf8(c).unwrap().contains(",99\n"));
}

#[test]
fn bad_configs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), 999);
    assert_eq!(code(&run(&["run", cfg.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()])), 2);
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"experiment_id": "x", "unknown": 1}"#).unwrap();
    assert_eq!(code(&run(&["run", bad.to_str().unwrap()])), 2);
    assert_eq!(code(&run(&["run", dir.path().join("missing.json").to_str().unwrap()])), 2);
}

#[test]
fn bundled_configs_match_schema() {
    let dir = root().join("../../configs");
    for entry in fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        let v: Value = serde_json::from_str(&fs::read_to_string(&p).unwrap()).unwrap();
        assert_valid("experiment-config", &v);
    }
}
