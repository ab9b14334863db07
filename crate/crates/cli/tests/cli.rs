//! End-to-end tests of the `qsys` binary: exit-code contract, JSON
//! round-trips and byte-level determinism.

use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn qsys(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsys"))
        .args(args)
        .env_remove("QSYS_MAX_CUTOFF")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

fn lambert_spec_file() -> temppath::TempPath {
    let mut f = temppath::TempPath::new("lambert.json");
    f.write(br#"{"kind": "standard", "indices": [1], "D": [["1"]], "G": [["2"]]}"#);
    f
}

/// Minimal scoped temp file helper.
mod temppath {
    use std::path::PathBuf;
    use std::sync::atomic::{AtomicU64, Ordering};

    static COUNTER: AtomicU64 = AtomicU64::new(0);

    pub struct TempPath(PathBuf);

    impl TempPath {
        pub fn new(name: &str) -> Self {
            let n = COUNTER.fetch_add(1, Ordering::Relaxed);
            let mut p = std::env::temp_dir();
            p.push(format!("qsys-test-{}-{n}-{name}", std::process::id()));
            TempPath(p)
        }

        pub fn write(&mut self, bytes: &[u8]) {
            std::fs::write(&self.0, bytes).unwrap();
        }

        pub fn as_str(&self) -> &str {
            self.0.to_str().unwrap()
        }
    }

    impl Drop for TempPath {
        fn drop(&mut self) {
            let _ = std::fs::remove_file(&self.0);
        }
    }
}

#[test]
fn solve_lambert_from_spec_file() {
    let spec = lambert_spec_file();
    let out = qsys(&["solve", "--spec", spec.as_str(), "--cutoff", "4"]);
    let v = stdout_json(&out);
    let terms = v["1"]["terms"].as_array().unwrap();
    let coefs: Vec<&str> = terms.iter().map(|t| t["coef"].as_str().unwrap()).collect();
    assert_eq!(coefs, ["1", "-1", "2", "-5", "14"]);
}

#[test]
fn solve_algebra_emits_strings() {
    let out = qsys(&["solve", "--algebra", "A1", "--cutoff", "3"]);
    let v = stdout_json(&out);
    assert_eq!(v["(1,2)"]["terms"].as_array().unwrap().len(), 3);
    assert_eq!(v["(1,3)"]["terms"].as_array().unwrap().len(), 4);
}

#[test]
fn series_r_matches_solve() {
    let spec = lambert_spec_file();
    let solve = qsys(&["solve", "--spec", spec.as_str(), "--cutoff", "4"]);
    let series = qsys(&[
        "series", "r", "--spec", spec.as_str(), "--nu", "1", "--cutoff", "4",
    ]);
    let sv = stdout_json(&solve);
    let rv = stdout_json(&series);
    assert_eq!(sv["1"], rv);
}

#[test]
fn series_k_denominator() {
    let out = qsys(&["series", "k", "--algebra", "A1", "--nu", "", "--cutoff", "8"]);
    let v = stdout_json(&out);
    let terms = v["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 2);
    assert_eq!(terms[1]["coef"], "-1");
}

#[test]
fn coefficient_table_mode() {
    let spec = lambert_spec_file();
    let out = qsys(&[
        "series", "k", "--spec", spec.as_str(), "--nu", "1", "--cutoff", "3", "--table",
    ]);
    let rows = stdout_json(&out);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.get("K").is_some() && r.get("R").is_some()));
}

#[test]
fn verify_exit_codes() {
    let ok = qsys(&["verify", "--algebra", "A2", "--cutoff", "6"]);
    assert_eq!(ok.status.code(), Some(0));
    let report = stdout_json(&ok);
    assert_eq!(report["algebra"], "A2");
    assert!(report["checks"].as_array().unwrap().len() > 5);

    // the twisted A_2n family gates its tail-factor denominator comparison
    let twisted = qsys(&["verify", "--algebra", "A2^2", "--cutoff", "8"]);
    assert_eq!(twisted.status.code(), Some(0));
    let treport = stdout_json(&twisted);
    let denom = treport["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "denominator")
        .expect("denominator check present");
    assert_eq!(denom["status"], "pass");
    assert!(denom.get("informational").is_none());

    let bad_cutoff = qsys(&["verify", "--algebra", "A1", "--cutoff", "0"]);
    assert_eq!(bad_cutoff.status.code(), Some(2));

    let over_cap = qsys(&["verify", "--algebra", "A1", "--cutoff", "40"]);
    assert_eq!(over_cap.status.code(), Some(2));
}

#[test]
fn cutoff_cap_is_configurable() {
    let out = Command::new(env!("CARGO_BIN_EXE_qsys"))
        .args(["series", "k", "--algebra", "A1", "--nu", "", "--cutoff", "18"])
        .env("QSYS_MAX_CUTOFF", "20")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn malformed_inputs_exit_2() {
    let empty = qsys(&["solve", "--spec", "/dev/null", "--cutoff", "3"]);
    assert_eq!(empty.status.code(), Some(2));

    let missing = qsys(&["solve", "--cutoff", "3"]);
    assert_eq!(missing.status.code(), Some(2));

    let selector = qsys(&["solve", "--algebra", "Q9", "--cutoff", "3"]);
    assert_eq!(selector.status.code(), Some(2));

    let bad_nu = qsys(&["series", "k", "--algebra", "A2", "--nu", "(9,9):1", "--cutoff", "3"]);
    assert_eq!(bad_nu.status.code(), Some(2));
}

#[test]
fn precondition_failures_exit_3() {
    let mut singular = temppath::TempPath::new("singular.json");
    singular.write(
        br#"{"kind": "finite-general", "indices": [1, 2],
             "D": [["1", "1"], ["1", "1"]],
             "G": [["0", "0"], ["0", "0"]]}"#,
    );
    let out = qsys(&["solve", "--spec", singular.as_str(), "--cutoff", "3"]);
    assert_eq!(out.status.code(), Some(3));

    // multiplicities are defined for untwisted classical algebras only
    let twisted = qsys(&["decompose", "--algebra", "A2^2", "--nu", "(1,1):1", "--cutoff", "3"]);
    assert_eq!(twisted.status.code(), Some(3));
}

#[test]
fn decompose_clebsch_gordan() {
    let out = qsys(&["decompose", "--algebra", "A1", "--nu", "(1,1):2", "--cutoff", "6"]);
    let rows = stdout_json(&out);
    assert_eq!(
        rows,
        serde_json::json!([
            {"multiplicity": "1", "weight": [2]},
            {"multiplicity": "1", "weight": [0]},
        ])
    );

    let out2 = qsys(&[
        "decompose", "--algebra", "A2", "--nu", "(1,1):1,(2,1):1", "--cutoff", "6",
    ]);
    let rows2 = stdout_json(&out2);
    assert_eq!(
        rows2,
        serde_json::json!([
            {"multiplicity": "1", "weight": [1, 1]},
            {"multiplicity": "1", "weight": [0, 0]},
        ])
    );
}

#[test]
fn identities_subcommand() {
    let out = qsys(&["identities", "--n", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = stdout_json(&out);
    assert_eq!(rows.as_array().unwrap().len(), 3);
    let bad = qsys(&["identities", "--which", "bn-dn", "--n", "1"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn output_is_deterministic_and_round_trips() {
    let args = [
        "verify", "--algebra", "B2", "--cutoff", "5", "--seed", "11",
    ];
    let a = qsys(&args);
    let b = qsys(&args);
    assert_eq!(a.stdout, b.stdout, "byte-identical output for equal config");
    let report = stdout_json(&a);
    let reparsed: Value = serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
    assert_eq!(report, reparsed);

    // solution JSON re-parses to an equal value through the library too
    let spec = lambert_spec_file();
    let solved = qsys(&["solve", "--spec", spec.as_str(), "--cutoff", "5"]);
    let v = stdout_json(&solved);
    let series = qsys_core::json::series_from_json(&v["1"]).unwrap();
    assert_eq!(qsys_core::json::series_to_json(&series), v["1"]);
}

#[test]
fn pretty_and_out_flags() {
    let mut out_path = temppath::TempPath::new("out.json");
    out_path.write(b"");
    let out = qsys(&[
        "solve", "--algebra", "A1", "--cutoff", "2", "--pretty", "--out",
        out_path.as_str(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(out_path.as_str()).unwrap();
    assert!(text.contains('\n'));
    let _: Value = serde_json::from_str(&text).unwrap();
    let _ = std::io::stdout().flush();
}
