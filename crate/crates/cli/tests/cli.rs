use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const SWAP: &str = r#"{
  "points": ["a", "b"],
  "weights": ["1/2", "1/2"],
  "group": {"family": "finite", "params": {"table": [[0, 1], [1, 0]]}},
  "actions": [[[1, 0]]]
}"#;

const Z5_ROTATION: &str = r#"{
  "points": 5,
  "group": {"family": "Zm", "params": {"rank": 1}},
  "actions": [[[1, 2, 3, 4, 0]]]
}"#;

struct Dir(tempfile::TempDir);

impl Dir {
    fn new() -> Dir {
        Dir(tempfile::tempdir().unwrap())
    }

    fn file(&self, name: &str, text: &str) -> PathBuf {
        let p = self.0.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn path(&self) -> &Path {
        self.0.path()
    }
}

fn cubeavg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cubeavg"))
        .args(args)
        .env_remove("CUBEAVG_OUTPUT_DIR")
        .output()
        .unwrap()
}

fn report(args: &[&str]) -> (i32, Value) {
    let out = cubeavg(args);
    let code = out.status.code().unwrap();
    let stderr = String::from_utf8_lossy(&out.stderr);
    let doc = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {stderr}"));
    (code, doc)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn cube_avg_on_the_swap_system() {
    let dir = Dir::new();
    let swap = dir.file("swap.json", SWAP);
    let (code, doc) = report(&["cube-avg", "--system", s(&swap), "--d", "1", "--f", "indicator:a"]);
    assert_eq!(code, 0);
    assert_eq!(doc["result"]["integral"], 0.25);
    assert_eq!(doc["tool"], "cubeavg");
    assert_eq!(doc["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(doc["config"]["f"][0], "indicator:a");
    assert_eq!(doc["seed"], 0);
}

#[test]
fn random_bound_check_is_reproducible() {
    let args = ["check-bound", "--random", "--trials", "60", "--seed", "7"];
    let a = cubeavg(&args);
    let b = cubeavg(&["--threads", "1", "check-bound", "--random", "--trials", "60", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let doc: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(doc["passed"], true);
    assert_eq!(doc["result"]["failures"].as_array().unwrap().len(), 0);
    assert_eq!(doc["seed"], 7);
}

#[test]
fn cube_count_methods_agree() {
    let dir = Dir::new();
    let e = dir.file("E.bits", "dims 2\nextents 8 8\nrle 1*40 0*3 1*21\n");
    let (code, doc) = report(&["cube-count", "--window", s(&e), "--h", "1,1", "--method", "both"]);
    assert_eq!(code, 0);
    assert_eq!(doc["result"]["equal"], true);
    assert_eq!(doc["result"]["fast"], doc["result"]["brute"]);
    let (_, neg) = report(&["cube-count", "--window", s(&e), "--h=-2,3", "--orientation", "right"]);
    assert!(neg["result"]["count"].as_u64().is_some());
}

#[test]
fn exit_codes() {
    let dir = Dir::new();
    let swap = dir.file("swap.json", SWAP);
    assert_eq!(cubeavg(&["cube-avg", "--system", s(&swap), "--f", "indicator:zz"]).status.code(), Some(2));
    assert_eq!(cubeavg(&["cube-avg", "--system", "/nonexistent.json", "--f", "const:1"]).status.code(), Some(2));
    let broken = dir.file("broken.json", r#"{"points": 2, "group": {"family": "free", "params": {}}, "actions": []}"#);
    assert_eq!(cubeavg(&["magic-build", "--system", s(&broken)]).status.code(), Some(2));
    assert_eq!(cubeavg(&["no-such-command"]).status.code(), Some(2));

    // a two-step schedule on an integer action does not settle
    let rot = dir.file("rot.json", Z5_ROTATION);
    let (code, doc) = report(&["cube-limit", "--system", s(&rot), "--f", "indicator:0", "--schedule", "1,2"]);
    assert_eq!(code, 1);
    assert_eq!(doc["passed"], false);
}

#[test]
fn csv_rounds_to_twelve_digits() {
    let dir = Dir::new();
    let rot = dir.file("rot.json", Z5_ROTATION);
    let out = cubeavg(&[
        "cube-limit", "--system", s(&rot), "--f", "values:1,0,0,0,2", "--schedule", "3,30,300", "--format", "csv",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("key,value\n"));
    let trace = text.lines().find(|l| l.starts_with("result.trace[1],")).unwrap();
    let digits: String = trace.split(',').nth(1).unwrap().chars().filter(|c| c.is_ascii_digit()).collect();
    assert!(digits.trim_start_matches('0').len() <= 12, "{trace}");
}

#[test]
fn output_locations() {
    let dir = Dir::new();
    let swap = dir.file("swap.json", SWAP);
    let target = dir.path().join("nested/out.json");
    let out = cubeavg(&["cube-avg", "--system", s(&swap), "--f", "const:1", "--output", s(&target)]);
    assert!(out.status.success() && out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(doc["result"]["integral"], 1.0);

    let status = Command::new(env!("CARGO_BIN_EXE_cubeavg"))
        .args(["magic-build", "--random", "--seed", "3", "--format", "csv"])
        .env("CUBEAVG_OUTPUT_DIR", dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.path().join("magic-build-seed3.csv").exists());
}

#[test]
fn joining_checks() {
    let (code, doc) = report(&["check-order", "--random", "--trials", "10", "--seed", "1"]);
    assert_eq!((code, &doc["passed"]), (0, &Value::Bool(true)));
    let (code, doc) = report(&["check-csg", "--random", "--actions", "2", "--eta", "0,1", "--f", "signed:4"]);
    assert_eq!(code, 0, "{doc}");
    let (code, doc) = report(&["magic-build", "--random", "--actions", "3", "--seed", "5"]);
    assert_eq!(code, 0);
    assert!(doc["result"]["star_points"].as_u64().unwrap() >= doc["result"]["base_points"].as_u64().unwrap());
    let (code, doc) = report(&["structure-check", "--random", "--actions", "2", "--seed", "2", "--eps", "0,1"]);
    assert_eq!(code, 0, "{doc}");
    let (code, doc) =
        report(&["iterated-check", "--random", "--d", "3", "--f", "signed:1", "--f", "signed:2", "--f", "signed:3", "--f", "signed:4", "--f", "signed:5", "--f", "signed:6", "--f", "signed:7", "--f", "signed:8", "--seed", "9"]);
    assert_eq!(code, 0, "{doc}");
    assert_eq!(doc["result"]["status"], "passed");
}

#[test]
fn combinatorial_commands() {
    let common = ["--random-window", "64,64", "--p", "0.5", "--seed", "4"];
    let with = |extra: &[&str]| {
        let mut args: Vec<&str> = extra[..1].to_vec();
        args.extend_from_slice(&common);
        args.extend_from_slice(&extra[1..]);
        report(&args)
    };
    let (code, doc) = with(&["density", "--schedule", "8,16,64"]);
    assert_eq!(code, 0);
    assert_eq!(doc["result"]["densities"].as_array().unwrap().len(), 3);
    let (code, doc) = with(&["good-shifts", "--c", "0.05", "--shifts", "1:9", "--toroidal", "--max-gap", "64"]);
    assert_eq!(code, 0, "{doc}");
    assert_eq!(doc["result"]["shape"], serde_json::json!([8, 8]));
    let (code, doc) = with(&["syndetic-probe", "--boxes", "1x1,8x8"]);
    assert_eq!(code, 0);
    assert_eq!(doc["result"]["probes"][1]["all_met"], true);
    let (code, doc) = with(&["correspond", "--radius", "1", "--shift", "0,0", "--shift", "1,-1"]);
    assert_eq!(code, 0, "{doc}");
    assert_eq!(doc["result"]["measure_preserving"], true);
}

#[test]
fn van_der_corput_command() {
    let (code, doc) = report(&["vdc-check", "--theta", "0.3", "--m", "4", "--c", "0.1"]);
    assert_eq!(code, 0, "{doc}");
    assert_eq!(doc["passed"], true);
    assert_eq!(cubeavg(&["vdc-check", "--m", "8", "--c", "0.05", "--n", "4"]).status.code(), Some(2));
}
