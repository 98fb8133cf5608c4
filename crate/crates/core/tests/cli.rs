//! The `bochner-lab` binary end to end: exit codes, text output and JSON
//! output validated against the shipped schemas.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bochner-lab"))
        .args(args)
        .env_remove("BOCHNER_LAB_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn validated(o: &Output, schema: &str) -> Value {
    let text = std::fs::read_to_string(repo().join("schemas").join(schema)).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    let doc: Value = serde_json::from_slice(&o.stdout).expect("stdout is JSON");
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(&doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "schema violations: {errors:?}");
    doc
}

#[test]
fn list_text_is_alphabetical_and_describes_the_zoo() {
    let o = lab(&["list"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("s6_octonionic dim=6 compatible=yes"));
    assert!(out.contains("flat_torus_2 dim=2"));
    let names: Vec<&str> = out.lines().map(|l| l.split(' ').next().unwrap()).collect();
    let mut sorted = names.clone();
    sorted.sort_unstable();
    assert_eq!(names, sorted);
}

#[test]
fn list_json_matches_schema() {
    let doc = validated(&lab(&["list", "--json"]), "list.schema.json");
    assert!(doc["manifolds"].as_array().unwrap().len() >= 8);
}

#[test]
fn diagnose_flat_torus_is_harmonic_and_integrable() {
    let o = lab(&["diagnose", "flat_torus_2", "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let d = validated(&o, "diagnosis.schema.json");
    for k in ["int_nabla_j_sq", "int_dj_sq", "int_delta_j_sq", "i4"] {
        assert!(d[k].as_f64().unwrap().abs() < 1e-12, "{k} = {}", d[k]);
    }
    assert_eq!(d["harmonic"], true);
    assert_eq!(d["integrable"], true);
    assert_eq!(d["kahler"], true);
}

#[test]
fn diagnose_six_sphere_reports_the_curvature_constants() {
    // resolution 3 keeps this quick; the constants hold at every node
    let o = lab(&["diagnose", "s6", "--resolution", "3", "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let d = validated(&o, "diagnosis.schema.json");
    for (k, want) in [
        ("t1", 30.0),
        ("t2", 6.0),
        ("scalar", 30.0),
        ("nabla_j_sq", 24.0),
        ("energy", 3.0),
    ] {
        for v in d[k].as_array().unwrap() {
            assert!((v.as_f64().unwrap() - want).abs() < 1e-6, "{k}: {v}");
        }
    }
    assert_eq!(d["integrable"], false);
    assert_eq!(d["harmonic"], false);
    let text = stdout(&lab(&["diagnose", "s6_octonionic", "--resolution", "3"]));
    assert!(
        text.contains("T1              [30.0000000000, 30.0000000000]"),
        "{text}"
    );
    assert!(
        text.contains("T2              [6.0000000000, 6.0000000000]"),
        "{text}"
    );
}

#[test]
fn missing_spec_file_exits_2_with_diagnostics() {
    let o = lab(&["diagnose", "missing.spec"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing.spec"));
}

#[test]
fn malformed_spec_file_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.spec");
    let good = std::fs::read_to_string(repo().join("specs/tilted_torus.spec")).unwrap();
    std::fs::write(&path, good.replace("entry = -2", "entry = -2 *")).unwrap();
    let o = lab(&["diagnose", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let line = good.lines().position(|l| l == "entry = -2").unwrap() + 1;
    assert!(
        stderr(&o).contains(&format!("line {line}")),
        "{}",
        stderr(&o)
    );
}

#[test]
fn shipped_spec_files_diagnose_cleanly() {
    for f in ["tilted_torus", "round_sphere_2", "bumped_torus"] {
        let path = repo().join(format!("specs/{f}.spec"));
        let o = lab(&[
            "diagnose",
            path.to_str().unwrap(),
            "--resolution",
            "12",
            "--json",
        ]);
        assert_eq!(o.status.code(), Some(0), "{f}: {}", stderr(&o));
        validated(&o, "diagnosis.schema.json");
    }
}

#[test]
fn spec_file_runs_through_verify() {
    let path = repo().join("specs/bumped_torus.spec");
    let o = lab(&["verify", "selfadjoint", path.to_str().unwrap(), "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = validated(&o, "check_result.schema.json");
    assert_eq!(r["manifold"], "bumped_torus");
    assert!(r["values"]["lap_j_j"].as_f64().unwrap() > 1.0);
}

#[test]
fn verify_bochner_on_the_six_sphere_passes() {
    let o = lab(&[
        "verify",
        "bochner",
        "s6_octonionic",
        "--resolution",
        "3",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = validated(&o, "check_result.schema.json");
    assert_eq!(r["pass"], true);
    assert!(r["values"]["max_residual"].as_f64().unwrap() < 1e-6);
}

#[test]
fn failing_check_exits_1() {
    // two Gauss–Legendre nodes per angle cannot resolve the sphere's area
    let o = lab(&["verify", "volume", "round_sphere_2", "--resolution", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("FAIL"));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["verify", "no_such_check", "flat_torus_2"][..],
        &["suite", "--manifold", "klein_bottle"],
        &["convergence", "volume", "s2", "4,eight"],
        &["convergence", "curvature", "s2", "4,8"],
        &["list", "--tolerance-profile", "lenient"],
        &["list", "--threads", "0"],
        &["diagnose"],
        &[],
    ] {
        assert_eq!(lab(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn bad_thread_variable_is_a_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_bochner-lab"))
        .arg("list")
        .env("BOCHNER_LAB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("BOCHNER_LAB_THREADS"));
}

#[test]
fn help_exits_0() {
    let o = lab(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("convergence"));
}

#[test]
fn suite_json_is_deterministic_across_thread_counts() {
    let args = [
        "suite",
        "--manifold",
        "flat_torus_2_skew",
        "--manifold",
        "round_sphere_2",
        "--seed",
        "42",
        "--resolution",
        "8",
        "--json",
    ];
    let one = lab(&[&args[..], &["--threads", "1"]].concat());
    let env = Command::new(env!("CARGO_BIN_EXE_bochner-lab"))
        .args(args)
        .env("BOCHNER_LAB_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(one.status.code(), env.status.code());
    assert_eq!(one.stdout, env.stdout);
    let rep = validated(&one, "report.schema.json");
    assert_eq!(rep["seed"], 42);
    assert_eq!(rep["results"].as_array().unwrap().len(), 22);
}

#[test]
fn strict_profile_is_recorded() {
    let o = lab(&[
        "suite",
        "--manifold",
        "flat_torus_2",
        "--tolerance-profile",
        "strict",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let rep = validated(&o, "report.schema.json");
    assert_eq!(rep["profile"], "strict");
    assert_eq!(rep["verdict"], true);
}

#[test]
fn volume_convergence_on_the_six_sphere_is_monotone() {
    let o = lab(&["convergence", "volume", "s6", "4,8,12", "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let t = validated(&o, "convergence.schema.json");
    assert_eq!(t["exact_reference"], true);
    let errs: Vec<f64> = t["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["error"].as_f64().unwrap())
        .collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    assert!(errs[2] / t["reference"].as_f64().unwrap() < 1e-6);
}

#[test]
fn convergence_text_table() {
    let o = lab(&["convergence", "selfadjoint", "flat_torus_2_skew", "4,8"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.lines().count() >= 4, "{out}");
    assert!(out.contains("resolution"));
}
