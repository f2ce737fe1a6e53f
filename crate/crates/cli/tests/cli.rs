use std::process::{Command, Output};

fn bethe_gl3(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bethe-gl3")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON report")
}

/// Drops every timing field so two runs can be compared byte for byte.
fn strip_timing(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(map) => {
            map.remove("elapsed_ms");
            map.values_mut().for_each(strip_timing);
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

#[test]
fn izergin_suite_passes_as_json() {
    let out = bethe_gl3(&["verify-izergin", "--seed", "7", "--seeds", "2", "--format", "json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let report = json(&out);
    assert_eq!(report["totals"]["failed"], 0);
    let cases = report["cases"].as_array().unwrap();
    assert!(!cases.is_empty());
    // exact suites carry no float residuals
    assert!(cases.iter().all(|c| c.get("residual").is_none() && c["exact_mismatch"] == false));
}

#[test]
fn single_action_case() {
    let out = bethe_gl3(&[
        "verify-action",
        "--entry",
        "31",
        "--sites",
        "3",
        "--a",
        "2",
        "--b",
        "1",
        "--n",
        "1",
        "--seed",
        "3",
        "--seeds",
        "1",
        "--twist",
        "off",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let report = json(&out);
    assert_eq!(report["cases"][0]["id"], "action/31/3/2/1/1/3");
    assert_eq!(report["cases"][0]["passed"], true);
}

#[test]
fn blacklisted_q_is_a_config_error() {
    let out = bethe_gl3(&["verify-rtt", "--q", "1/1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("blacklisted"));
    assert!(out.stdout.is_empty());
    assert_eq!(bethe_gl3(&["verify-action", "--entry", "44"]).status.code(), Some(2));
    assert_eq!(bethe_gl3(&["verify-rtt", "--twist=-1"]).status.code(), Some(2));
}

#[test]
fn reports_are_reproducible_and_replayable() {
    let args = ["on-shell", "--a", "1", "--b", "1", "--seed", "4", "--format", "json"];
    let (mut x, mut y) = (json(&bethe_gl3(&args)), json(&bethe_gl3(&args)));
    assert!(x["cases"][0]["residual"].as_f64().unwrap() < 1e-20);
    let config = x["config"].clone();
    strip_timing(&mut x);
    strip_timing(&mut y);
    assert_eq!(x.to_string(), y.to_string());

    let dir = std::env::temp_dir().join(format!("bethe-gl3-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("config.json");
    std::fs::write(&path, config.to_string()).unwrap();
    let mut z = json(&bethe_gl3(&["replay", path.to_str().unwrap()]));
    strip_timing(&mut z);
    assert_eq!(x.to_string(), z.to_string());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn text_output_and_report_file() {
    let dir = std::env::temp_dir().join(format!("bethe-gl3-cli-text-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.txt");
    let out = bethe_gl3(&["verify-vacuum", "--sites", "2", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.lines().any(|l| l.starts_with("PASS vacuum/vacuum/2/")));
    assert!(text.lines().last().unwrap().contains("0 failed"));
    std::fs::remove_dir_all(&dir).unwrap();
}
