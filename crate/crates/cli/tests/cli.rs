use std::path::{Path, PathBuf};
use std::process::Command;

use paradox_core::cert::{Certificate, Payload};
use paradox_core::paradox::{free_semigroup_witness, positive_window};
use paradox_core::GroupSpec;
use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn paradox(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_paradox")).args(args).output().unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

const SEMIGROUP_CHECK: &[&str] =
    &["check", "--group", "bs12", "--set", "semigroup((2,0),(2,1);e)", "--translators", "(2,0),(2,1)", "--window", "4"];
const INTEGER_CHECK: &[&str] = &["check", "--group", "zn:1", "--set", "all", "--translators", "ball:1", "--window", "3"];

fn save(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn verify_code(path: &Path) -> (i32, String) {
    let r = paradox(&["verify", path.to_str().unwrap()]);
    (r.code, r.stderr)
}

fn reseal(mut c: Certificate) -> String {
    c.digest = c.compute_digest();
    c.to_json()
}

#[test]
fn semigroup_check_finds_a_match() {
    let r = paradox(SEMIGROUP_CHECK);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(doc["kind"], "match");
    assert_eq!(doc["schema"], "paradox-cert/v1");
    assert_eq!(doc["group"], "bs12");
}

#[test]
fn integer_check_returns_the_counted_deficiency() {
    let r = paradox(INTEGER_CHECK);
    assert_eq!(r.code, 2, "{}", r.stderr);
    let doc: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(doc["kind"], "deficiency");
    assert_eq!(doc["violator"].as_array().unwrap().len(), 7);
    assert_eq!(doc["neighborhood"], 9);
}

#[test]
fn output_is_byte_deterministic() {
    for args in [SEMIGROUP_CHECK, INTEGER_CHECK] {
        assert_eq!(paradox(args).stdout, paradox(args).stdout);
    }
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("m.json");
    let mut args = SEMIGROUP_CHECK.to_vec();
    args.extend(["--out", out.to_str().unwrap(), "--quiet"]);
    let r = paradox(&args);
    assert_eq!((r.code, r.stdout.as_str(), r.stderr.as_str()), (0, "", ""));
    assert_eq!(std::fs::read_to_string(&out).unwrap(), paradox(SEMIGROUP_CHECK).stdout);
}

#[test]
fn usage_errors_exit_one() {
    let r = paradox(&["check", "--group", "zn:1", "--set", "union(all", "--translators", "ball:1", "--window", "2"]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("error"), "{}", r.stderr);
    assert_eq!(paradox(&["check", "--group", "zn:1", "--set", "all", "--translators", "ball:1"]).code, 1);
    assert_eq!(paradox(&["check", "--group", "sl:2", "--set", "all", "--translators", "ball:1", "--window", "1"]).code, 1);
    assert_eq!(paradox(&["frobnicate"]).code, 1);
    assert_eq!(paradox(&["--help"]).code, 0);
}

#[test]
fn own_certificates_verify() {
    let dir = TempDir::new().unwrap();
    for (i, args) in [SEMIGROUP_CHECK, INTEGER_CHECK].iter().enumerate() {
        let path = save(&dir, &format!("c{i}.json"), &paradox(args).stdout);
        assert_eq!(verify_code(&path).0, 0);
    }
}

#[test]
fn edited_assignment_is_a_collision() {
    let dir = TempDir::new().unwrap();
    let mut c = Certificate::from_json(&paradox(SEMIGROUP_CHECK).stdout).unwrap();
    let Payload::Match { assignment, .. } = &mut c.payload else { panic!() };
    // send the second copy of the first point where its first copy goes
    assignment[0][2] = assignment[0][1].clone();
    let stale = save(&dir, "stale.json", &c.to_json());
    assert_eq!(verify_code(&stale).0, 3);
    let forged = save(&dir, "forged.json", &reseal(c));
    let (code, stderr) = verify_code(&forged);
    assert_eq!(code, 3);
    assert!(stderr.contains("collision"), "{stderr}");
}

#[test]
fn shrunken_violator_fails_the_count() {
    let dir = TempDir::new().unwrap();
    let mut c = Certificate::from_json(&paradox(INTEGER_CHECK).stdout).unwrap();
    let Payload::Deficiency { violator, .. } = &mut c.payload else { panic!() };
    violator.truncate(2);
    let (code, stderr) = verify_code(&save(&dir, "d.json", &reseal(c)));
    assert_eq!(code, 3);
    assert!(stderr.contains("neighborhood") || stderr.contains("deficiency"), "{stderr}");
}

#[test]
fn unreadable_or_foreign_files_exit_one() {
    let dir = TempDir::new().unwrap();
    let text = paradox(INTEGER_CHECK).stdout.replace("paradox-cert/v1", "paradox-cert/v9");
    assert_eq!(verify_code(&save(&dir, "schema.json", &text)).0, 1);
    assert_eq!(verify_code(&save(&dir, "junk.json", "{ not json")).0, 1);
    assert_eq!(verify_code(&dir.path().join("missing.json")).0, 1);
}

#[test]
fn embedding_from_a_match_certificate() {
    let dir = TempDir::new().unwrap();
    let cert = save(&dir, "m.json", &paradox(SEMIGROUP_CHECK).stdout);
    let r = paradox(&["embed-f2", "--from-cert", cert.to_str().unwrap(), "--depth", "6"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(doc["injective"], true);
    assert_eq!(doc["evaluated"], 1457);
    assert_eq!(doc["violations"].as_array().unwrap().len(), 0);
}

#[test]
fn embedding_refuses_a_tampered_certificate() {
    let dir = TempDir::new().unwrap();
    let text = paradox(SEMIGROUP_CHECK).stdout.replacen("\"(2,0)\"", "\"(2,1)\"", 1);
    let cert = save(&dir, "m.json", &text);
    assert_eq!(paradox(&["embed-f2", "--from-cert", cert.to_str().unwrap()]).code, 3);
}

#[test]
fn small_integer_set() {
    let r = paradox(&["small-set", "--group", "zn:1", "--count", "4"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc: Value = serde_json::from_str(&r.stdout).unwrap();
    let names: Vec<&str> = doc["elements"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(names, ["(0)", "(1)", "(-2)", "(5)"]);
    assert_eq!(doc["exclusion"], true);
    assert!(doc["maxPair"].as_u64().unwrap() <= 2);
}

#[test]
fn projection_identities_from_a_witness_certificate() {
    let dir = TempDir::new().unwrap();
    let g = GroupSpec::DyadicAffine;
    let (s, t) = (g.parse_elem("(2,0)").unwrap(), g.parse_elem("(2,1)").unwrap());
    let wit = free_semigroup_witness(g, &s, &t, 4).unwrap().unwrap();
    let w = positive_window(g, &s, &t, 4).unwrap();
    let cert = save(&dir, "w.json", &Certificate::from_witness(&wit, &w).to_json());
    let r = paradox(&["cp-witness", "--from-cert", cert.to_str().unwrap(), "--window", "4"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.stderr.matches("ok ").count(), 5, "{}", r.stderr);
    let out = save(&dir, "cp.json", &r.stdout);
    assert_eq!(verify_code(&out).0, 0);
}

#[test]
fn type_order_exit_codes() {
    let z = paradox(&[
        "type-order", "--group", "zn:1", "-m", "2", "--set", "all", "-n", "1", "--set-b", "all", "--translators",
        "ball:1", "--window", "3",
    ]);
    assert_eq!(z.code, 2, "{}", z.stderr);
    let doc: Value = serde_json::from_str(&z.stdout).unwrap();
    assert_eq!(doc["kind"], "flow-deficiency");
    assert_eq!(doc["violator"].as_array().unwrap().len(), 7);
    let f = paradox(&[
        "type-order", "--group", "free:2", "-m", "2", "--set", "all", "-n", "1", "--set-b", "all", "--translators",
        "ball:1", "--window", "2",
    ]);
    assert_eq!(f.code, 0, "{}", f.stderr);
    let dir = TempDir::new().unwrap();
    assert_eq!(verify_code(&save(&dir, "f.json", &f.stdout)).0, 0);
    assert_eq!(verify_code(&save(&dir, "z.json", &z.stdout)).0, 0);
}

#[test]
fn induce_transports_a_token_witness() {
    let dir = TempDir::new().unwrap();
    let doc = r#"{
  "xTokens": ["E", "E1", "E2"],
  "gamma0Elems": ["a", "a^-2"],
  "eqEFacts": {"disjoint": [[1, 2]], "covers": [[1], [2]]}
}"#;
    let path = save(&dir, "x.json", doc);
    let p = path.to_str().unwrap();
    let r = paradox(&["induce", "--group", "free:2", "--subgroup", "cyclic:a", "--witness", p, "--t", "b"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let out: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(out["output"]["sj"][0], "b a b^-1");
    assert_eq!(out["t"], "b");
    let bad = save(&dir, "bad.json", &doc.replace("\"a^-2\"", "\"b\""));
    let r = paradox(&["induce", "--group", "free:2", "--subgroup", "cyclic:a", "--witness", bad.to_str().unwrap(), "--t", "b"]);
    assert_eq!(r.code, 1);
}
