use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

fn spec_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs").join(name)
}

fn hemicirc(args: &[&str], out: &Path) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_hemicirc"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs");
    (o.status.code().unwrap_or(-1), String::from_utf8_lossy(&o.stderr).into_owned())
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn csvs(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok()?.file_name().into_string().ok())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    v.sort();
    v
}

#[test]
fn ergodicity_dyadic_z3_is_divergent() {
    let d = TempDir::new().unwrap();
    let spec = spec_path("dyadic-z3.json");
    let (code, _) = hemicirc(&["ergodicity", "--spec", spec.to_str().unwrap()], d.path());
    assert_eq!(code, 0);
    let r = report(d.path());
    assert_eq!(r["schema"], "hemicirc-report/1");
    assert_eq!(r["payload"]["verdict"], "ergodic");
    assert!(r["payload"]["subgroup_sums"].as_array().unwrap().iter().all(|s| s["verdict"] == "divergent"));
    assert_eq!(r["config"]["horizon"], 12);
    assert_eq!(r["config"]["epsilon"], "1/10");
}

#[test]
fn reports_are_byte_identical() {
    let spec = spec_path("dyadic-z3.json");
    let mut runs = Vec::new();
    for _ in 0..2 {
        let d = TempDir::new().unwrap();
        let (code, _) = hemicirc(&["hollow", "--spec", spec.to_str().unwrap(), "--horizon", "8"], d.path());
        assert_eq!(code, 1);
        assert_eq!(report(d.path())["status"], "certified-negative");
        let mut files = vec![fs::read(d.path().join("report.json")).unwrap()];
        for c in csvs(d.path()) {
            files.push(fs::read(d.path().join(c)).unwrap());
        }
        runs.push(files);
    }
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn hollow_writes_one_csv_per_character() {
    let d = TempDir::new().unwrap();
    let spec = spec_path("klein-four.json");
    let (code, _) = hemicirc(&["hollow", "--spec", spec.to_str().unwrap(), "--horizon", "6"], d.path());
    assert!(code == 0 || code == 1);
    let names = csvs(d.path());
    assert_eq!(names.len(), 3);
    let text = fs::read_to_string(d.path().join(&names[0])).unwrap();
    assert!(text.starts_with("d,norm_bound,analytic_bound\n"));
    assert_eq!(text.lines().count(), 8);
    assert_eq!(report(d.path())["csv"].as_array().unwrap().len(), 3);
}

#[test]
fn trivial_group_has_no_csvs() {
    let d = TempDir::new().unwrap();
    let spec = spec_path("dyadic-odometer.json");
    let (code, _) = hemicirc(&["hollow", "--spec", spec.to_str().unwrap()], d.path());
    assert_eq!(code, 0);
    assert!(csvs(d.path()).is_empty());
    let notes = report(d.path())["notes"].as_array().unwrap().clone();
    assert!(notes.iter().any(|n| n.as_str().unwrap().contains("trivial group")));
}

#[test]
fn invariant_table_columns() {
    let d = TempDir::new().unwrap();
    let spec = spec_path("dyadic-z3.json");
    let (code, _) = hemicirc(&["invariant", "--spec", spec.to_str().unwrap(), "--horizon", "6"], d.path());
    assert_eq!(code, 0);
    let text = fs::read_to_string(d.path().join("invariant_l0.csv")).unwrap();
    assert!(text.starts_with("p_index,d,value\n"));
    assert_eq!(text.lines().count(), 1 + 4 * 7);
    let r = report(d.path());
    assert_eq!(r["payload"]["record_non_decreasing"], true);
}

#[test]
fn malformed_spec_exits_2_naming_the_field() {
    let d = TempDir::new().unwrap();
    let bad = d.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"group":{"cyclic_orders":[2]},"mode":"template","template_coeffs":[[[0],[["0","1","2"]]],[[1],[["1","1","2"]]]]}"#,
    )
    .unwrap();
    let (code, err) = hemicirc(&["ergodicity", "--spec", bad.to_str().unwrap()], d.path());
    assert_eq!(code, 2);
    assert!(err.contains("schedule"), "{err}");
    assert!(!d.path().join("report.json").exists());

    fs::write(&bad, r#"{"group":{"cyclic_orders":[2]},"mode":"template","template_coeffs":[[[0],[["0","-1","2"]]]],"schedule":{"kind":"geometric","base":2}}"#).unwrap();
    let (code, err) = hemicirc(&["ergodicity", "--spec", bad.to_str().unwrap()], d.path());
    assert_eq!(code, 2);
    assert!(err.contains("template_coeffs"), "{err}");

    let (code, err) = hemicirc(&["ergodicity", "--spec", "/nonexistent.json"], d.path());
    assert_eq!(code, 2);
    assert!(err.contains("/nonexistent.json"), "{err}");

    let spec = spec_path("dyadic-z3.json");
    let (code, err) = hemicirc(&["ergodicity", "--spec", spec.to_str().unwrap(), "--epsilon", "2"], d.path());
    assert_eq!(code, 2);
    assert!(err.contains("epsilon"), "{err}");
}

#[test]
fn non_ergodic_power_exits_1() {
    let d = TempDir::new().unwrap();
    let spec = spec_path("dyadic-odometer.json");
    let (code, _) = hemicirc(&["power", "--spec", spec.to_str().unwrap(), "--power", "2"], d.path());
    assert_eq!(code, 1);
    let r = report(d.path());
    assert_eq!(r["status"], "certified-negative");
    assert_eq!(r["payload"]["analysis"]["verdict"], "not-ergodic");
    assert!(r["payload"]["views"][0]["b_level"].is_array());
    assert!(r["payload"]["views"][0]["a_level"].is_object());
}

#[test]
fn ergodic_power_embeds_character_norms() {
    let d = TempDir::new().unwrap();
    let spec = spec_path("three-odometer.json");
    let (code, _) = hemicirc(&["power", "--spec", spec.to_str().unwrap(), "--power", "2", "--horizon", "6"], d.path());
    assert_eq!(code, 0);
    let r = report(d.path());
    assert_eq!(r["payload"]["character_norms"]["certified"], true);
    assert_eq!(r["payload"]["delta_identity"], true);
}

#[test]
fn power_flag_on_other_pipelines() {
    let d = TempDir::new().unwrap();
    let spec = spec_path("three-odometer.json");
    let (code, _) = hemicirc(&["ergodicity", "--spec", spec.to_str().unwrap(), "--power", "2"], d.path());
    assert_eq!(code, 0);
    let r = report(d.path());
    assert_eq!(r["payload"]["power_view"]["power"], 2);
    // partial sums grow linearly but the circulant schedule has no closed form
    let sums = r["payload"]["result"]["subgroup_sums"].as_array().unwrap();
    assert!(sums.iter().all(|s| s["verdict"] != "vanishing"));
    assert_ne!(r["payload"]["result"]["verdict"], "not-ergodic");
}

#[test]
fn guard_abort_writes_partial_report() {
    let d = TempDir::new().unwrap();
    let spec = d.path().join("capped.json");
    fs::write(
        &spec,
        r#"{"group":{"cyclic_orders":[2]},"mode":"template","template_coeffs":[[[0],[["0","1","2"]]],[[1],[["1","1","2"]]]],"schedule":{"kind":"linear-recurrence","seeds":[1,2],"coeffs":[1,1]},"support_cap":40}"#,
    )
    .unwrap();
    let out = d.path().join("out");
    let (code, err) = hemicirc(&["hollow", "--spec", spec.to_str().unwrap(), "--horizon", "24"], &out);
    assert_eq!(code, 3, "{err}");
    let r = report(&out);
    assert_eq!(r["status"], "guard-abort");
    assert_eq!(r["partial"], true);
    assert!(r["payload"]["horizon"].as_u64().unwrap() < 24);
    assert!(out.join("meta.json").exists());
}

#[test]
fn verify_passes_and_meta_is_separate() {
    let d = TempDir::new().unwrap();
    let (code, _) = hemicirc(&["verify", "--horizon", "6", "--samples", "50"], d.path());
    assert_eq!(code, 0);
    let r = report(d.path());
    assert_eq!(r["payload"]["all_pass"], true);
    assert!(r.get("unix_time").is_none());
    let meta: Value = serde_json::from_str(&fs::read_to_string(d.path().join("meta.json")).unwrap()).unwrap();
    assert!(meta["unix_time"].is_u64());
}

#[test]
fn tensor_check_certifies_same_spec() {
    let d = TempDir::new().unwrap();
    let spec = spec_path("dyadic-z3.json");
    let (code, _) = hemicirc(&["tensor-check", "--spec", spec.to_str().unwrap(), "--horizon", "5"], d.path());
    assert_eq!(code, 0);
    assert_eq!(report(d.path())["payload"]["verdict"], "certified");
}

#[test]
fn witness_and_reductions_run() {
    let d = TempDir::new().unwrap();
    let spec = spec_path("morse-thue.json");
    let fam = d.path().join("family.json");
    fs::write(&fam, r#"[[["0","1","2"],["1","-1","2"]],[["0","1","2"],["2","-1","2"]]]"#).unwrap();
    let out = d.path().join("w");
    let (code, err) = hemicirc(
        &["witness", "--spec", spec.to_str().unwrap(), "--family", fam.to_str().unwrap(), "--horizon", "8"],
        &out,
    );
    assert_eq!(code, 0, "{err}");
    assert!(report(&out)["payload"]["gap"].as_f64().unwrap() > 0.5);

    for (p, s) in [("at-reduce", "dyadic-z3.json"), ("watc", "morse-thue.json")] {
        let out = d.path().join(p);
        let (code, err) = hemicirc(&[p, "--spec", spec_path(s).to_str().unwrap()], &out);
        assert_eq!(code, 0, "{p}: {err}");
        assert!(!report(&out)["payload"].is_null());
    }
}

#[test]
fn oversized_window_hits_support_guard() {
    let d = TempDir::new().unwrap();
    let spec = spec_path("dyadic-z3.json");
    let (code, err) = hemicirc(&["watc", "--spec", spec.to_str().unwrap()], d.path());
    assert_eq!(code, 3);
    assert!(err.contains("support guard"), "{err}");
    let r = report(d.path());
    assert_eq!(r["status"], "guard-abort");
    assert_eq!(r["partial"], true);
}
