use std::path::PathBuf;
use std::process::Command;

use clonelab::cli::Report;

fn input(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("inputs").join(name)
}

fn clonelab(args: &[&str]) -> (i32, Report) {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let status = Command::new(env!("CARGO_BIN_EXE_clonelab"))
        .args(args)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    let report: Report = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    (status.code().unwrap(), report)
}

#[test]
fn verify_thm41_on_not_and() {
    let (code, r) = clonelab(&["verify-thm41", "--input", input("not_and_swap.json").to_str().unwrap(), "--max-arity", "2"]);
    assert_eq!(code, 0);
    assert!(r.failures.is_empty());
    assert!(r.hypotheses.iter().all(|h| h.holds));
    assert_eq!(r.data["reports"][0]["counterexamples"].as_array().unwrap().len(), 0);
    assert_eq!(r.data["source_profile"], serde_json::json!([4, 16]));
}

#[test]
fn homogeneity_reports_p4_witness() {
    let (code, r) = clonelab(&["homogeneity", "--input", input("p4.json").to_str().unwrap()]);
    assert_ne!(code, 0);
    assert!(!r.data["report"]["homogeneous"].as_bool().unwrap());
    assert!(r.data["report"]["witness"].is_array());
    assert_eq!(r.data["witness_verified"], serde_json::json!(true));
    let (code, _) = clonelab(&["homogeneity", "--input", input("c5.json").to_str().unwrap()]);
    assert_eq!(code, 0);
}

#[test]
fn check_extension_value_five() {
    let (code, r) = clonelab(&["check-extension", "--input", input("shift_double.json").to_str().unwrap(), "--trials", "5"]);
    assert_eq!(code, 0, "{:?}", r.failures);
    let probe = &r.data["probes"][0];
    assert_eq!(probe["value"], serde_json::json!("5"));
    assert_eq!(probe["well_defined"]["paths"], serde_json::json!(5));
    assert_eq!(r.data["probes"].as_array().unwrap().len(), 3);
}

#[test]
fn other_inputs_run() {
    for (cmd, file) in [("e-g-check", "constants.json"), ("enumerate-homs", "and_or_homs.json"), ("density", "s3_density.json")] {
        let (code, r) = clonelab(&[cmd, "--input", input(file).to_str().unwrap()]);
        assert_eq!(code, 0, "{cmd}: {:?}", r.failures);
        assert_eq!(code == 0, r.failures.is_empty());
    }
    let (_, r) = clonelab(&["enumerate-homs", "--input", input("and_or_homs.json").to_str().unwrap()]);
    assert_eq!(r.data["count"], serde_json::json!(1));
}

#[test]
fn seeded_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_clonelab"))
            .args(["transitivity", "--seed", "11", "--count", "20", "--no-timestamp", "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(out).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));
}

#[test]
fn csv_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let status = Command::new(env!("CARGO_BIN_EXE_clonelab"))
        .args(["e-g-check", "--format", "csv", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.starts_with("section,name,holds,detail"));

    let (code, r) = clonelab(&["homogeneity"]);
    assert_ne!(code, 0);
    assert!(r.failures[0].contains("--input"));
    let (code, r) = clonelab(&["transitivity", "--count", "0"]);
    assert_ne!(code, 0);
    assert_eq!(r.schema, 1);
}
