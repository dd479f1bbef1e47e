use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

use renoq::cli::commands::{all_contained, compare_renovation};
use renoq::cli::CliError;
use renoq::sim::SimConfig;
use renoq::{ModelParams, Resolution};

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn renoq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_renoq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_config(cmd: &str, cfg: &PathBuf, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "-c", cfg.to_str().unwrap()];
    args.extend_from_slice(extra);
    renoq(&args)
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write_temp(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    std::io::Write::write_all(&mut f, text.as_bytes()).unwrap();
    f
}

fn numbers(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

/// Structural equality with numbers compared to a relative tolerance.
fn assert_close(a: &Value, b: &Value, path: &str) {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            assert_eq!(x.keys().collect::<Vec<_>>(), y.keys().collect::<Vec<_>>(), "{path}");
            for (k, v) in x {
                assert_close(v, &y[k], &format!("{path}.{k}"));
            }
        }
        (Value::Array(x), Value::Array(y)) => {
            assert_eq!(x.len(), y.len(), "{path}");
            for (i, (u, v)) in x.iter().zip(y).enumerate() {
                assert_close(u, v, &format!("{path}[{i}]"));
            }
        }
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            assert!((x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1e-300), "{path}: {x} vs {y}");
        }
        _ => assert_eq!(a, b, "{path}"),
    }
}

#[test]
fn analyze_matches_golden_documents() {
    for (cfg, gold, extra) in [
        ("renovation.json", "renovation_analyze.json", &[][..]),
        ("red_profile.json", "red_profile_analyze.json", &["--kmax", "20"][..]),
    ] {
        let out = json(&run_config("analyze", &config(cfg), extra));
        let expected: Value = serde_json::from_str(&std::fs::read_to_string(golden(gold)).unwrap()).unwrap();
        assert_close(&out, &expected, cfg);
    }
}

#[test]
fn shipped_configs_pass_compare() {
    for cfg in ["classic.json", "renovation.json", "renovation_option2.json", "red_tail_drop.json", "red_profile.json"] {
        let out = run_config("compare", &config(cfg), &[]);
        let doc = json(&out);
        assert_eq!(doc["all_contained"], Value::Bool(true), "{cfg}");
    }
}

#[test]
fn simulate_is_byte_identical_for_a_fixed_seed() {
    for format in ["json", "csv"] {
        let a = run_config("simulate", &config("renovation_option2.json"), &["--format", format]);
        let b = run_config("simulate", &config("renovation_option2.json"), &["--format", format]);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout);
    }
    let a = run_config("simulate", &config("renovation.json"), &["--seed", "1"]);
    let b = run_config("simulate", &config("renovation.json"), &["--seed", "2"]);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn classic_analysis_loses_only_by_blocking() {
    let doc = json(&run_config("analyze", &config("classic.json"), &[]));
    let pn = numbers(&doc["pn"]);
    assert_eq!(doc["loss"]["pi"].as_f64().unwrap(), *pn.last().unwrap());
    assert_eq!(doc["loss"]["renovated"].as_f64().unwrap(), 0.0);
    assert!((pn.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn red_with_equal_rates_and_tail_drop_is_uniform() {
    let cfg = write_temp(
        r#"{"model":"red","params":{"arrival_rate":1,"service_rate":1,"capacity":4,"drop":[0,0,0,0,1]}}"#,
    );
    let out = renoq(&["analyze", "-c", cfg.path().to_str().unwrap()]);
    let doc = json(&out);
    for p in numbers(&doc["pn"]) {
        assert!((p - 0.2).abs() < 1e-14);
    }
    assert!((doc["cl"]["pmf"][0].as_f64().unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn csv_tables_have_headers_and_rows() {
    let out = run_config("analyze", &config("renovation.json"), &["--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,value");
    assert_eq!(lines.len(), 1 + 7);
    let out = run_config("compare", &config("classic.json"), &["--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("metric,analytic,simulated,ci_half_width,verdict\n"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",contained")));
}

#[test]
fn calibrate_reaches_the_configured_targets() {
    let doc = json(&run_config("calibrate", &config("calibrate.json"), &["--budget", "200"]));
    let result = &doc["result"];
    assert!(result["objective"].as_f64().unwrap() < 1e-6, "{result}");
    let q = numbers(&result["q"]);
    assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(result["evaluations"].as_u64().unwrap() <= 200);
    let out = run_config("calibrate", &config("red_profile.json"), &[]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn exit_codes() {
    assert_eq!(renoq(&["analyze", "-c", "/nonexistent/run.json"]).status.code(), Some(2));
    assert_eq!(renoq(&["frobnicate"]).status.code(), Some(2));
    let malformed = write_temp("{ not json");
    assert_eq!(renoq(&["analyze", "-c", malformed.path().to_str().unwrap()]).status.code(), Some(2));
    let invalid = write_temp(
        r#"{"model":"renovation","params":{"arrival_rate":0,"service_time":1,"capacity":3,"renovation":[1,0,0,0],"option":"option1"}}"#,
    );
    assert_eq!(renoq(&["analyze", "-c", invalid.path().to_str().unwrap()]).status.code(), Some(3));
    let bad_q = write_temp(
        r#"{"model":"renovation","params":{"arrival_rate":1,"service_time":1,"capacity":3,"renovation":[0.5,0.5,0.5,-0.5],"option":"option1"}}"#,
    );
    assert_eq!(renoq(&["analyze", "-c", bad_q.path().to_str().unwrap()]).status.code(), Some(3));
    let no_sim = write_temp(
        r#"{"model":"renovation","params":{"arrival_rate":1,"service_time":1,"capacity":3,"renovation":[1,0,0,0],"option":"option1"}}"#,
    );
    assert_eq!(renoq(&["simulate", "-c", no_sim.path().to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn compare_flags_a_corrupted_analytic_model() {
    let truth = ModelParams::new(0.9, 1.0, 5, vec![0.7, 0.2, 0.1, 0.0, 0.0, 0.0], Resolution::KeepLast).unwrap();
    let wrong = truth.with_renovation(vec![0.5, 0.3, 0.2, 0.0, 0.0, 0.0]).unwrap();
    let sim = SimConfig::new(100_000, 10, 2024);
    assert!(all_contained(&compare_renovation(&truth, &truth, &sim).unwrap()));
    let rows = compare_renovation(&wrong, &truth, &sim).unwrap();
    assert!(!all_contained(&rows));
    assert_eq!(CliError::CompareFailed.exit_code(), 4);
}
