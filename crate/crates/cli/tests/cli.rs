use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qott(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qott")).args(args).env_remove("QOTT_SEED").output().expect("spawn qott")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn schema() -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn assert_schema(v: &Value) {
    let validator = schema();
    let errors: Vec<String> = validator.iter_errors(v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "schema violations: {errors:?}");
}

fn check<'a>(v: &'a Value, name: &str) -> &'a Value {
    v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no check named {name:?}"))
}

fn without_wall_time(out: &Output) -> Value {
    let mut v = report(out);
    v.as_object_mut().unwrap().remove("wall_time_ms");
    v
}

#[test]
fn masker_verification_passes_and_flags_expected_failures() {
    let out = qott(&["verify-maskers", "--d", "2,3,5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = report(&out);
    assert_schema(&v);
    assert_eq!(v["pass"], true);
    let statuses: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["status"].as_str().unwrap()).collect();
    assert!(statuses.contains(&"expected-fail"));
    assert!(!statuses.contains(&"fail"));
}

#[test]
fn empty_or_out_of_range_dimension_is_a_usage_error() {
    assert_eq!(qott(&["verify-maskers", "--d", ""]).status.code(), Some(2));
    assert_eq!(qott(&["verify-maskers", "--d", "9"]).status.code(), Some(2));
}

#[test]
fn wrong_index_cheater_stays_under_the_binding_bound() {
    let out = qott(&[
        "protocol",
        "run",
        "--p",
        "5",
        "--J",
        "1,2",
        "--strategy",
        "wrong-index",
        "--trials",
        "10000",
        "--seed",
        "7",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(&out);
    assert_schema(&v);
    let mc = check(&v, "Monte Carlo acceptance");
    assert_eq!(mc["pass"], true);
    assert!(mc["value"].as_f64().unwrap() <= mc["bound"].as_f64().unwrap() + mc["tolerance"].as_f64().unwrap());
    assert!(mc["bound"].as_f64().unwrap() >= 0.5);
}

#[test]
fn honest_and_tamper_runs_pass() {
    for args in [
        vec!["protocol", "run", "--p", "3", "--strategy", "honest", "--trials", "200"],
        vec!["protocol", "run", "--p", "3", "--strategy", "honest", "--masker", "four-qudit"],
        vec!["protocol", "run", "--p", "3", "--strategy", "tamper", "--channel", "zero"],
        vec!["protocol", "run", "--p", "3", "--strategy", "tamper", "--channel", "depolarize:0.4"],
        vec!["protocol", "run", "--p", "3", "--strategy", "generic", "--offset", "0", "0"],
        vec!["protocol", "run", "--p", "3", "--strategy", "honest", "--epsilon", "0.1"],
    ] {
        let out = qott(&args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stdout));
        assert_schema(&report(&out));
    }
}

#[test]
fn zero_replacement_is_accepted_one_ninth_of_the_time() {
    let v = report(&qott(&["protocol", "run", "--p", "3", "--strategy", "tamper", "--channel", "zero"]));
    let c = check(&v, "tamper acceptance vs. partner overlap");
    assert!((c["value"].as_f64().unwrap() - 1.0 / 9.0).abs() < 1e-10);
}

#[test]
fn invalid_flag_combinations_are_rejected() {
    for args in [
        vec!["protocol", "run", "--strategy", "honest", "--channel", "zero"],
        vec!["protocol", "run", "--strategy", "tamper", "--offset", "1", "0"],
        vec!["protocol", "run", "--strategy", "tamper", "--channel", "bogus"],
        vec!["protocol", "run", "--epsilon", "1.5"],
        vec!["protocol", "run", "--p", "4"],
        vec!["protocol", "run", "--J", "0,1"],
        vec!["superdense", "--dits", "1"],
    ] {
        assert_eq!(qott(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn src_table_lists_every_scheme() {
    let out = qott(&["src", "--p", "5", "--J", "1,2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(&out);
    assert_schema(&v);
    let csv = qott(&["--format", "csv", "src", "--p", "5", "--J", "1,2"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("scheme,"));
    let schemes: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(schemes, ["qott", "qotp-via-rivest", "rivest-bit", "superdense"]);
}

#[test]
fn same_seed_gives_identical_reports() {
    let args = ["protocol", "run", "--p", "3", "--strategy", "generic", "--trials", "500", "--seed", "11"];
    let a = qott(&args);
    let b = qott(&args);
    assert_eq!(without_wall_time(&a), without_wall_time(&b));
    let c = qott(&["protocol", "run", "--p", "3", "--strategy", "generic", "--trials", "500", "--seed", "12"]);
    assert_ne!(without_wall_time(&a)["data"], without_wall_time(&c)["data"]);
}

#[test]
fn seed_defaults_to_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_qott"))
        .args(["baseline", "run", "--p", "5", "--message", "3"])
        .env("QOTT_SEED", "42")
        .output()
        .unwrap();
    assert_eq!(report(&out)["seed"], 42);
    assert_eq!(report(&qott(&["baseline", "run", "--p", "5", "--message", "3"]))["seed"], 0);
}

#[test]
fn csv_output_falls_back_to_checks() {
    let out = qott(&["--format", "csv", "baseline", "run", "--p", "7", "--message", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("name,value,relation,bound,tolerance,status"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",pass")));
}

#[test]
fn report_can_be_written_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = qott(&["--out", path.to_str().unwrap(), "superdense", "--dits", "1", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_schema(&v);
    assert_eq!(v["pass"], true);
}

#[test]
fn fixtures_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let commodity = dir.path().join("commodity");
    let masker = dir.path().join("masker");
    for args in [
        vec!["export", "commodity", "--p", "3", "--J", "1,2", "--dir", commodity.to_str().unwrap()],
        vec!["import", "commodity", "--dir", commodity.to_str().unwrap()],
        vec!["export", "masker", "--family", "four-qudit", "--d", "3", "--dir", masker.to_str().unwrap()],
        vec!["import", "masker", "--dir", masker.to_str().unwrap()],
    ] {
        let out = qott(&args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stdout));
        assert_schema(&report(&out));
    }
    assert!(commodity.join("commodity.qdtc").is_file());
    assert!(commodity.join("cards.json").is_file());
}

#[test]
fn corrupted_fixture_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let commodity = dir.path().join("c");
    let d = commodity.to_str().unwrap();
    assert_eq!(qott(&["export", "commodity", "--dir", d]).status.code(), Some(0));
    std::fs::write(commodity.join("commodity.qdtc"), b"QDTC garbage").unwrap();
    assert_eq!(qott(&["import", "commodity", "--dir", d]).status.code(), Some(2));
}

#[test]
fn repetition_shrinks_cheating_acceptance() {
    let out =
        qott(&["montecarlo", "--p", "3", "--J", "1,2", "--strategy", "generic", "--trials", "2000", "--repeat", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_schema(&report(&out));
}
