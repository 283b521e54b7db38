use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn aac(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aac")).args(args).current_dir(dir).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn verify_selected_suites_writes_reports() {
    let tmp = TempDir::new().unwrap();
    let o = aac(&["verify", "--suites", "EQ9_DRS_FORMS,LEM24_JR_COMMUTE", "--out", "rep"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for tag in ["EQ9_DRS_FORMS", "LEM24_JR_COMMUTE"] {
        let text = fs::read_to_string(tmp.path().join("rep").join(format!("{tag}.toml"))).unwrap();
        let v: toml::Value = toml::from_str(&text).unwrap();
        let records = v["record"].as_array().unwrap();
        assert!(!records.is_empty());
        assert!(records.iter().all(|r| r["verdict"].as_str() == Some("PASS")));
    }
    assert_eq!(fs::read_dir(tmp.path().join("rep")).unwrap().count(), 2);
}

#[test]
fn default_verify_writes_every_suite() {
    let tmp = TempDir::new().unwrap();
    let path = config(tmp.path(), "instances = 20\nout = \"all\"\n");
    let o = aac(&["verify", "--config", &path], tmp.path());
    let c = code(&o);
    assert!(c == 0 || c == 1, "exit {c}");
    assert_eq!(fs::read_dir(tmp.path().join("all")).unwrap().count(), 14);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(c == 0, !stdout.contains("FAIL"));
}

#[test]
fn unknown_suite_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&aac(&["verify", "--suites", "NOPE"], tmp.path())), 2);
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let path = config(tmp.path(), "gama = 0.5\n");
    assert_eq!(code(&aac(&["verify", "--config", &path], tmp.path())), 2);
}

#[test]
fn zero_anchor_with_noncommutation_suite_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let path = config(tmp.path(), "w = [0.0, 0.0]\nsuites = [\"PROP28_NONEQUALITIES\"]\n");
    let o = aac(&["verify", "--config", &path], tmp.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("degenerate"));
}

#[test]
fn iterate_writes_trace() {
    let tmp = TempDir::new().unwrap();
    let path = config(tmp.path(), "x0 = [2.0, 0.0]\nout = \"it\"\n");
    let o = aac(&["iterate", "--config", &path], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(tmp.path().join("it/trace.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,x_1,x_2,shadow_1,shadow_2,residual"));
    let last: Vec<&str> = csv.lines().last().unwrap().split(',').collect();
    let x: f64 = last[1].parse().unwrap();
    let y: f64 = last[2].parse().unwrap();
    assert!((x - 2.0 / 3.0).abs() < 1e-8 && (y + 1.0).abs() < 1e-8);
    assert_eq!(last[5], "");
}

#[test]
fn iterate_out_of_budget_exits_one() {
    let tmp = TempDir::new().unwrap();
    let path = config(tmp.path(), "max_iters = 3\n");
    assert_eq!(code(&aac(&["iterate", "--config", &path], tmp.path())), 1);
    assert!(tmp.path().join("aac-out/trace.csv").exists());
}

#[test]
fn malformed_model_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let path = config(tmp.path(), "U = [[1.0, 0.0], [2.0, 0.0]]\n");
    assert_eq!(code(&aac(&["report", "--config", &path], tmp.path())), 2);
    let path = config(tmp.path(), "x0 = [nan, 0.0]\n");
    assert_eq!(code(&aac(&["iterate", "--config", &path], tmp.path())), 2);
}

#[test]
fn report_is_written_and_stable() {
    let tmp = TempDir::new().unwrap();
    let path = config(tmp.path(), "probe = [0.5, -1.5]\n");
    for out in ["r1", "r2"] {
        let o = aac(&["report", "--config", &path, "--out", out], tmp.path());
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = fs::read(tmp.path().join("r1/report.toml")).unwrap();
    let b = fs::read(tmp.path().join("r2/report.toml")).unwrap();
    assert_eq!(a, b);
    let v: toml::Value = toml::from_str(std::str::from_utf8(&a).unwrap()).unwrap();
    assert_eq!(v["row"].as_array().unwrap().len(), 21);
    assert_eq!(v["noncommutation"].as_array().unwrap().len(), 2);
}

#[test]
fn help_exits_zero() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&aac(&["--help"], tmp.path())), 0);
    assert_eq!(code(&aac(&["frobnicate"], tmp.path())), 2);
}
