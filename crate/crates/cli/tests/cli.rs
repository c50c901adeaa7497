use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const SQUARE: &str = r#"{"type":"box","lo":[0.0,0.0],"hi":[1.0,1.0]}"#;
const TRIANGLE: &str = r#"{"type":"simplex","vertices":[[0.0,0.0],[1.0,0.0],[0.0,1.0]]}"#;
const BALL3: &str = r#"{"type":"ellipsoid","center":[0.0,0.0,0.0],"shape":[[1.0,0.0,0.0],[0.0,1.0,0.0],[0.0,0.0,1.0]]}"#;

fn body_file(dir: &TempDir, name: &str, json: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, json).unwrap();
    p
}

fn floatberg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_floatberg"))
        .args(args)
        .env_remove("FLOATBERG_THREADS")
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn theta_for_the_square_ends_near_four_over_pi_squared() {
    let dir = TempDir::new().unwrap();
    let body = body_file(&dir, "square.json", SQUARE);
    let out = dir.path().join("theta.csv");
    let o = floatberg(&[
        "theta", "--body", s(&body), "--deltas", "0.02,0.01,0.005", "--directions", "720",
        "--tol", "1e-6", "--out", s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "delta,L,U,theta,flagged");
    assert_eq!(lines.len(), 5);
    let last: Vec<&str> = lines[4].split(',').collect();
    let theta: f64 = last[3].parse().unwrap();
    let target = 4.0 / std::f64::consts::PI.powi(2);
    assert!((theta / target - 1.0).abs() < 0.01, "{theta}");
}

#[test]
fn square_figure_is_an_svg() {
    let dir = TempDir::new().unwrap();
    let body = body_file(&dir, "square.json", SQUARE);
    for fig in ["1", "2", "3"] {
        let out = dir.path().join(format!("fig{fig}.svg"));
        let o = floatberg(&[
            "figure", "--body", s(&body), "--delta", "0.05", "--figure", fig, "--out", s(&out),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let svg = fs::read_to_string(&out).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }
    let fig2 = fs::read_to_string(dir.path().join("fig2.svg")).unwrap();
    assert!(fig2.contains("firebrick"));
}

#[test]
fn triangle_verify_passes() {
    let dir = TempDir::new().unwrap();
    let body = body_file(&dir, "triangle.json", TRIANGLE);
    let out = dir.path().join("verify.csv");
    let o = floatberg(&[
        "verify", "--body", s(&body), "--delta", "0.01", "--directions", "360", "--tol", "1e-6",
        "--out", s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",pass")), "{csv}");
    assert!(csv.contains("sandwich_violations_lower,1.00000000000000002e-2,0.00000000000000000e0"));
    let sandwich = fs::read_to_string(out.with_extension("sandwich.csv")).unwrap();
    assert!(sandwich.starts_with("delta,violations_lower,violations_upper,worst_margin\n"));
}

#[test]
fn same_run_same_bytes() {
    let dir = TempDir::new().unwrap();
    let body = body_file(&dir, "square.json", SQUARE);
    let run = || {
        floatberg(&["floatbody", "--body", s(&body), "--delta", "0.02", "--directions", "90"]).stdout
    };
    let a = run();
    assert_eq!(a, run());
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 91);
    assert_eq!(text.lines().next(), Some("v1,v2,r,b1,b2"));
    let threaded = Command::new(env!("CARGO_BIN_EXE_floatberg"))
        .args(["floatbody", "--body", s(&body), "--delta", "0.02", "--directions", "90"])
        .env("FLOATBERG_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(threaded.stdout, text.as_bytes());
}

#[test]
fn kernel_values_in_full_precision() {
    let dir = TempDir::new().unwrap();
    let body = body_file(&dir, "square.json", SQUARE);
    let o = floatberg(&["kernel", "--body", s(&body), "--point", "0.5,0.5", "--point", "0.2,0.7"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    let want = std::f64::consts::PI.powi(2) / 16.0;
    assert!((row[2] / want - 1.0).abs() < 1e-8);
}

#[test]
fn three_dimensional_cuts_but_no_figures() {
    let dir = TempDir::new().unwrap();
    let body = body_file(&dir, "ball.json", BALL3);
    let o = floatberg(&["floatbody", "--body", s(&body), "--delta", "0.05", "--directions", "50"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 51);
    let o = floatberg(&["figure", "--body", s(&body), "--delta", "0.05"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--body"));
}

#[test]
fn input_errors_exit_with_two_and_name_the_field() {
    let dir = TempDir::new().unwrap();
    let square = body_file(&dir, "square.json", SQUARE);
    let broken = body_file(&dir, "broken.json", r#"{"type":"box","lo":[0.0]}"#);
    let missing = dir.path().join("missing.json");
    let cases: Vec<(Vec<&str>, &str)> = vec![
        (vec!["floatbody", "--body", s(&missing), "--delta", "0.1"], "--body"),
        (vec!["floatbody", "--body", s(&broken), "--delta", "0.1"], "--body"),
        (vec!["floatbody", "--body", s(&square), "--delta", "0.9"], "--delta"),
        (vec!["theta", "--body", s(&square), "--deltas", "0.01,0.02"], "--deltas"),
        (vec!["kernel", "--body", s(&square), "--point", "0.5"], "--point"),
        (vec!["kernel", "--body", s(&square), "--point", "1.5,0.5"], "--point"),
        (vec!["floatbody", "--body", s(&square), "--delta", "0.1", "--tol", "1e-20"], "--tol"),
        (vec!["floatbody", "--body", s(&square), "--delta", "0.1", "--directions", "0"], "--directions"),
        (vec!["verify", "--body", s(&square), "--delta", "0.1", "--samples", "0"], "--samples"),
    ];
    for (args, field) in cases {
        let o = floatberg(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(stderr(&o).contains(field), "{args:?}: {}", stderr(&o));
    }
    let o = floatberg(&["theta", "--body", s(&square), "--deltas", "abc"]);
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_floatberg"))
        .args(["floatbody", "--body", s(&square), "--delta", "0.1"])
        .env("FLOATBERG_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("FLOATBERG_THREADS"));
}
