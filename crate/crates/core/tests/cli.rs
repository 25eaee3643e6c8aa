use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const PRESET: &str = r#""params": {"asucc_V": 2, "afail_V": 3, "asucc_D": 1, "afail_D": 4, "c_audit": 1, "n_max": 2}"#;

fn benaloh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_benaloh")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn json(args: &[&str]) -> Value {
    let out = benaloh(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn keys(v: &Value) -> Vec<String> {
    let mut keys: Vec<String> = v.as_object().unwrap().keys().cloned().collect();
    keys.sort();
    keys
}

#[test]
fn nash_table_for_preset() {
    let out = benaloh(&["nash", "--example", "culnane-teague"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("s_D = [0.75, 0.25]"), "{text}");
    assert!(text.contains("Eu_V = -1.75"), "{text}");
}

#[test]
fn nash_json_is_schema_stable() {
    let a = json(&["nash", "--example", "culnane-teague", "--json"]);
    let b = json(&["nash", "--example", "culnane-teague", "--json"]);
    assert_eq!(a, b);
    assert_eq!(keys(&a), ["Eu", "R", "b_V", "s_D", "s_V"]);
    assert_eq!(keys(&a["Eu"]), ["u_D", "u_V"]);
    assert_eq!(keys(&a["s_D"]), ["p_never", "probs"]);
    assert_eq!(a["s_D"]["probs"][0].as_f64(), Some(0.75));

    let s = json(&["stackelberg", "--example", "culnane-teague", "--json", "--epsilon", "0.06"]);
    assert_eq!(keys(&s), ["Eu_V_eps", "epsilon", "nash_Eu_V", "p_V_NE", "p_V_eps", "sval"]);
    assert_eq!(s["sval"].as_f64(), Some(1.0));
}

#[test]
fn nash_for_five_rounds_and_one_round() {
    let dir = tempfile::tempdir().unwrap();
    let five = config(
        dir.path(),
        "five.json",
        r#"{"params": {"asucc_V": 2, "afail_V": 3, "asucc_D": 1, "afail_D": 4, "c_audit": 1, "n_max": 5}}"#,
    );
    let v = json(&["nash", "--json", "--config", five.to_str().unwrap()]);
    let s_v: Vec<f64> = serde_json::from_value(v["s_V"].clone()).unwrap();
    for (got, want) in s_v.iter().zip([0.8, 0.16, 0.032, 0.0064, 0.00128]) {
        assert!((got - want).abs() < 1e-3, "{s_v:?}");
    }

    let one = config(
        dir.path(),
        "one.json",
        r#"{"params": {"asucc_V": 2, "afail_V": 3, "asucc_D": 1, "afail_D": 4, "c_audit": 1, "n_max": 1}}"#,
    );
    let v = json(&["nash", "--json", "--config", one.to_str().unwrap()]);
    assert_eq!(v["s_V"], serde_json::json!([1.0]));
    assert_eq!(v["s_D"]["probs"], serde_json::json!([1.0]));
}

#[test]
fn stackelberg_table_and_horizon_errors() {
    let out = benaloh(&["stackelberg", "--example", "culnane-teague", "--epsilon", "0.06"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("SVal = 1\n"), "{}", stdout(&out));

    let dir = tempfile::tempdir().unwrap();
    let three = config(
        dir.path(),
        "three.json",
        r#"{"params": {"asucc_V": 2, "afail_V": 3, "asucc_D": 1, "afail_D": 4, "c_audit": 1, "n_max": 3}}"#,
    );
    let out = benaloh(&["stackelberg", "--config", three.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_max"));
}

#[test]
fn stackelberg_value_positive_when_device_risk_dominates() {
    let dir = tempfile::tempdir().unwrap();
    let path = config(
        dir.path(),
        "risky.json",
        r#"{"params": {"asucc_V": 3, "afail_V": 3, "asucc_D": 1, "afail_D": 10000, "c_audit": 1, "n_max": 2}}"#,
    );
    let v = json(&["stackelberg", "--json", "--config", path.to_str().unwrap()]);
    assert!(v["sval"].as_f64().unwrap() > 0.0, "{v}");
}

#[test]
fn sweep_writes_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("sweep.csv");
    let out = benaloh(&["sweep", "--example", "culnane-teague", "--grid", "200", "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(!text.contains('\r'));
    assert!(text.starts_with("p_V,eu_vs_br,nash_eu_V,sval\n0,-4,-1.75,1\n"), "{text}");
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let best = reader
        .records()
        .map(|r| r.unwrap()[1].parse::<f64>().unwrap())
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(best < 1.0 && best > 1.0 - 6.0 / 200.0, "{best}");
}

#[test]
fn simulate_reads_sim_section_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = config(dir.path(), "sim.json", &format!(r#"{{{PRESET}, "sim": {{"trials": 1, "seed": 3}}}}"#));
    let v = json(&["simulate", "--config", path.to_str().unwrap()]);
    assert_eq!(v["trials"].as_u64(), Some(1));
    let freqs = ["freq_cast_as_intended", "freq_cheated", "freq_caught"].map(|k| v[k].as_f64().unwrap());
    assert!(freqs.iter().all(|f| *f == 0.0 || *f == 1.0));
    assert_eq!(freqs.iter().sum::<f64>(), 1.0);

    let mixed = json(&["simulate", "--example", "culnane-teague", "--trials", "100000", "--seed", "9"]);
    let again = json(&["simulate", "--example", "culnane-teague", "--trials", "100000", "--seed", "9"]);
    assert_eq!(mixed, again);
    let behavioral = json(&["simulate", "--example", "culnane-teague", "--trials", "100000", "--seed", "9", "--behavioral"]);
    let (a, b) = (mixed["mean_u_V"].as_f64().unwrap(), behavioral["mean_u_V"].as_f64().unwrap());
    let se = mixed["stderr_u_V"].as_f64().unwrap().hypot(behavioral["stderr_u_V"].as_f64().unwrap());
    assert!((a - b).abs() <= 3.0 * se);
}

#[test]
fn verify_passes_on_preset_and_five_rounds() {
    let out = benaloh(&["verify", "--example", "culnane-teague"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(!stdout(&out).contains("FAIL"));

    let dir = tempfile::tempdir().unwrap();
    let five = config(
        dir.path(),
        "five.json",
        r#"{"params": {"asucc_V": 2, "afail_V": 3, "asucc_D": 1, "afail_D": 4, "c_audit": 1, "n_max": 5}}"#,
    );
    let out = benaloh(&["verify", "--config", five.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("last_round_eliminated = true, second_to_last_eliminable = false"));
}

#[test]
fn verify_fails_on_hand_edited_voter_strategy() {
    let dir = tempfile::tempdir().unwrap();
    let path = config(dir.path(), "edited.json", &format!(r#"{{{PRESET}, "strategies": {{"voter": [1, 0]}}}}"#));
    let out = benaloh(&["verify", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL verify_equilibrium"), "{}", stdout(&out));
}

#[test]
fn exit_codes_for_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let bad = config(
        d,
        "bad.json",
        r#"{"params": {"asucc_V": 2, "afail_V": 1, "asucc_D": 1, "afail_D": 4, "c_audit": 1, "n_max": 2}}"#,
    );
    let out = benaloh(&["nash", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("c_audit must be < afail_V"));

    let wrong_dim = config(d, "dim.json", &format!(r#"{{{PRESET}, "strategies": {{"voter": [0.5, 0.3, 0.2]}}}}"#));
    assert_eq!(benaloh(&["verify", "--config", wrong_dim.to_str().unwrap()]).status.code(), Some(2));

    assert_eq!(benaloh(&["nash"]).status.code(), Some(2));
    assert_eq!(benaloh(&["nash", "--example", "culnane-teague", "--bogus"]).status.code(), Some(2));
    assert_eq!(benaloh(&["stackelberg", "--example", "culnane-teague", "--epsilon", "-1"]).status.code(), Some(2));
    let missing = d.join("missing.json");
    assert_eq!(benaloh(&["nash", "--config", missing.to_str().unwrap()]).status.code(), Some(3));
    let blocked = d.join("bad.json").join("out.csv");
    assert_eq!(
        benaloh(&["sweep", "--example", "culnane-teague", "--out", blocked.to_str().unwrap()]).status.code(),
        Some(3)
    );
}
